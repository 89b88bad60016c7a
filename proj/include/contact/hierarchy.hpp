#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "contact/kernel.hpp"
#include "contact/spectral.hpp"

namespace contact {

/// Translation-invariant correlation function of order n on the lattice torus
/// (M sites per axis, spacing h), stored in the n - 1 difference coordinates
/// y_i = x_i - x_n. Values are row-major over (y_1, ..., y_{n-1}), each y_i a
/// d-vector. Order 1 is a single constant value.
struct LatticeField {
  int dimension = 1;
  int M = 0;
  double h = 1.0;
  int order = 2;
  double rho = 0.0;
  std::vector<double> values;

  double length() const { return M * h; }
};

inline std::size_t lattice_sites(int dim, int M, int order) {
  if (order <= 1) return 1;
  std::size_t n = 1;
  for (int i = 0; i < dim * (order - 1); ++i) n *= static_cast<std::size_t>(M);
  return n;
}

inline LatticeField constant_field(int dim, int M, double h, int order, double rho, double c) {
  return {dim, M, h, order, rho, std::vector<double>(lattice_sites(dim, M, order), c)};
}

/// Minimum-image distance of lattice offset j (one axis).
inline double lattice_offset(int j, int M, double h) {
  j = ((j % M) + M) % M;
  return std::min(j, M - j) * h;
}

/// Dispersal kernel periodized onto the lattice torus as cell masses w_j
/// (sum to 1), together with its DFT w_hat(k) = sum_j w_j e^{-2 pi i j.k / M}
/// (complex unless the weights are even).
class LatticeKernel {
 public:
  /// Exact cell masses of the periodized kernel via Poisson summation:
  /// w_hat(k) = sum over q = 2 pi m / L with m = k (mod M) of a_hat(q) prod sinc(q_i h / 2).
  LatticeKernel(const DispersalKernel& kernel, int M, double h)
      : dim_(kernel.dimension()), M_(M), h_(h) {
    check_geometry();
    const double L = M * h;
    const double dq = 2.0 * std::numbers::pi / L;
    const long mmax = static_cast<long>(std::ceil(kernel.hat_cutoff(1e-14) / dq));
    const double terms = std::pow(2.0 * mmax + 1.0, dim_);
    if (terms > 4e8) {
      std::ostringstream msg;
      msg << "lattice kernel: " << terms << " Fourier modes needed; reduce torus size or use a "
          << "faster-decaying kernel";
      throw std::invalid_argument(msg.str());
    }
    auto sinc = [&](double q) {
      const double z = 0.5 * q * h;
      return z == 0.0 ? 1.0 : std::sin(z) / z;
    };
    hat_.assign(lattice_sites(dim_, M, 2), {0.0, 0.0});
    auto wrap = [&](long m) { return static_cast<std::size_t>(((m % M) + M) % M); };
    if (dim_ == 1) {
      for (long m = -mmax; m <= mmax; ++m) {
        const double q = dq * m;
        hat_[wrap(m)] += kernel.hat(q) * sinc(q);
      }
    } else {
      std::vector<double> s(2 * mmax + 1);
      for (long m = -mmax; m <= mmax; ++m) s[m + mmax] = sinc(dq * m);
      for (long m1 = -mmax; m1 <= mmax; ++m1) {
        for (long m2 = -mmax; m2 <= mmax; ++m2) {
          const double q = dq * std::hypot(static_cast<double>(m1), static_cast<double>(m2));
          hat_[wrap(m1) * M + wrap(m2)] += kernel.hat(q) * s[m1 + mmax] * s[m2 + mmax];
        }
      }
    }
    weights_ = real_part(inverse_dft(hat_));
  }

  /// Lattice kernel from explicit cell masses on M^d sites.
  LatticeKernel(int dim, int M, double h, std::vector<double> weights)
      : dim_(dim), M_(M), h_(h), weights_(std::move(weights)) {
    check_geometry();
    if (weights_.size() != lattice_sites(dim, M, 2)) {
      throw std::invalid_argument("lattice kernel: expected M^d weights");
    }
    hat_ = forward_dft(complexify(weights_));
  }

  int dimension() const { return dim_; }
  int M() const { return M_; }
  double h() const { return h_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::complex<double>>& hat() const { return hat_; }

  /// Cell-averaged density a(y_j) = w_j / h^d.
  double density(std::size_t j) const { return weights_[j] / std::pow(h_, dim_); }

  /// Flat index of -j.
  std::size_t negate(std::size_t j) const {
    if (dim_ == 1) return (M_ - j) % M_;
    const std::size_t a = j / M_, b = j % M_;
    return ((M_ - a) % M_) * M_ + (M_ - b) % M_;
  }

  /// Flat index of i - j.
  std::size_t subtract(std::size_t i, std::size_t j) const {
    if (dim_ == 1) return (i + M_ - j) % M_;
    const std::size_t a = (i / M_ + M_ - j / M_) % M_, b = (i % M_ + M_ - j % M_) % M_;
    return a * M_ + b;
  }

 private:
  void check_geometry() const {
    if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("lattice: dimension must be 1 or 2");
    if (M_ < 2) throw std::invalid_argument("lattice: M must be at least 2");
    if (!(h_ > 0.0)) throw std::invalid_argument("lattice: spacing must be positive");
  }

  // DFTs over M^d by explicit summation of the separable transform; the
  // kernel tables are built once so this is not on any hot path
  using cvec = std::vector<std::complex<double>>;

  static cvec complexify(const std::vector<double>& v) { return cvec(v.begin(), v.end()); }
  static std::vector<double> real_part(const cvec& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
  }

  cvec transform(const cvec& in, double sign, double scale) const {
    const int M = M_;
    cvec tw(M);
    for (int k = 0; k < M; ++k) {
      tw[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * k / M);
    }
    if (dim_ == 1) {
      cvec out(M);
      for (int k = 0; k < M; ++k) {
        std::complex<double> s = 0.0;
        for (int j = 0; j < M; ++j) s += in[j] * tw[(static_cast<long>(j) * k) % M];
        out[k] = s * scale;
      }
      return out;
    }
    cvec rows(static_cast<std::size_t>(M) * M);
    for (int a = 0; a < M; ++a) {
      for (int k = 0; k < M; ++k) {
        std::complex<double> s = 0.0;
        for (int b = 0; b < M; ++b) s += in[a * M + b] * tw[(static_cast<long>(b) * k) % M];
        rows[a * M + k] = s;
      }
    }
    cvec out(static_cast<std::size_t>(M) * M);
    for (int k1 = 0; k1 < M; ++k1) {
      for (int k2 = 0; k2 < M; ++k2) {
        std::complex<double> s = 0.0;
        for (int a = 0; a < M; ++a) s += rows[a * M + k2] * tw[(static_cast<long>(a) * k1) % M];
        out[k1 * M + k2] = s * scale;
      }
    }
    return out;
  }

  cvec forward_dft(const cvec& w) const { return transform(w, -1.0, 1.0); }
  cvec inverse_dft(const cvec& w) const {
    return transform(w, 1.0, 1.0 / static_cast<double>(lattice_sites(dim_, M_, 2)));
  }

  int dim_;
  int M_;
  double h_;
  std::vector<double> weights_;
  std::vector<std::complex<double>> hat_;
};

/// The dual generator L_n* = -n + sum_i (a * . in x_i), acting on order-n
/// fields in difference coordinates. Diagonal in the lattice DFT with symbol
/// sum_i w_hat(k_i) + w_hat(-(k_1 + ... + k_{n-1})) - n.
class DualGenerator {
 public:
  DualGenerator(const LatticeKernel& kernel, int order)
      : dim_(kernel.dimension()), M_(kernel.M()), order_(order) {
    if (order < 2) throw std::invalid_argument("dual generator: order must be >= 2");
    size_ = lattice_sites(dim_, M_, order);
    const int rank = dim_ * (order - 1);
    std::vector<int> dims(rank, M_);
    buf_ = fftw_alloc_complex(size_);
    if (!buf_) throw std::bad_alloc();
    fwd_ = fftw_plan_dft(rank, dims.data(), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(rank, dims.data(), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);

    symbol_.resize(size_);
    const std::size_t block = lattice_sites(dim_, M_, 2);
    const auto& wh = kernel.hat();
    std::vector<std::size_t> parts(order - 1);
    for (std::size_t idx = 0; idx < size_; ++idx) {
      std::size_t rest = idx;
      for (int i = order - 2; i >= 0; --i) {
        parts[i] = rest % block;
        rest /= block;
      }
      std::complex<double> s = -static_cast<double>(order);
      std::size_t neg_sum = 0;
      for (auto p : parts) {
        s += wh[p];
        neg_sum = kernel.subtract(neg_sum, p);
      }
      s += wh[neg_sum];
      symbol_[idx] = s;
      if (std::abs(s.imag()) > 1e-13) real_symbol_ = false;
    }
  }

  DualGenerator(const DualGenerator&) = delete;
  DualGenerator& operator=(const DualGenerator&) = delete;

  ~DualGenerator() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  int order() const { return order_; }
  std::size_t size() const { return size_; }
  const std::vector<std::complex<double>>& symbol() const { return symbol_; }
  /// True when the kernel is even, so every symbol value is real.
  bool real_symbol() const { return real_symbol_; }

  /// out = multiplier(symbol) applied to in, as a Fourier multiplier. The
  /// multiplier maps a complex symbol value to a complex factor.
  template <class Multiplier>
  void apply_multiplier(const std::vector<double>& in, std::vector<double>& out,
                        Multiplier&& mult) {
    if (in.size() != size_) {
      throw std::invalid_argument("dual generator: field size does not match lattice/order");
    }
    for (std::size_t i = 0; i < size_; ++i) {
      buf_[i][0] = in[i];
      buf_[i][1] = 0.0;
    }
    fftw_execute(fwd_);
    const double norm = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      const std::complex<double> m = std::complex<double>(mult(symbol_[i], i)) * norm;
      const std::complex<double> z(buf_[i][0], buf_[i][1]);
      const std::complex<double> prod = z * m;
      buf_[i][0] = prod.real();
      buf_[i][1] = prod.imag();
    }
    fftw_execute(bwd_);
    out.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = buf_[i][0];
  }

  void apply(const std::vector<double>& in, std::vector<double>& out) {
    apply_multiplier(in, out, [](std::complex<double> s, std::size_t) { return s; });
  }

 private:
  int dim_, M_, order_;
  std::size_t size_ = 0;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_{}, bwd_{};
  std::vector<std::complex<double>> symbol_;
  bool real_symbol_ = true;
};

inline void check_compatible(const LatticeField& f, const LatticeKernel& k) {
  if (f.dimension != k.dimension() || f.M != k.M() || std::abs(f.h - k.h()) > 1e-12 * k.h()) {
    throw std::invalid_argument("lattice field and kernel discretizations differ");
  }
  if (f.values.size() != lattice_sites(f.dimension, f.M, f.order)) {
    throw std::invalid_argument("lattice field: value count does not match order");
  }
}

inline LatticeField apply_dual_generator(const LatticeField& field, const LatticeKernel& kernel) {
  check_compatible(field, kernel);
  DualGenerator gen(kernel, field.order);
  LatticeField out = field;
  gen.apply(field.values, out.values);
  return out;
}

/// f^(n) = sum_i k^(n-1)(x without x_i) sum_{j != i} a(x_i - x_j), for n = 2, 3.
inline LatticeField source_term(const LatticeField& lower, const LatticeKernel& kernel) {
  const int n = lower.order + 1;
  const int d = kernel.dimension();
  const int M = kernel.M();
  LatticeField out{d, M, kernel.h(), n, lower.rho, {}};
  out.values.assign(lattice_sites(d, M, n), 0.0);
  const std::size_t block = lattice_sites(d, M, 2);
  if (n == 2) {
    if (lower.values.size() != 1) throw std::invalid_argument("source_term: order-1 field is a constant");
    const double k1 = lower.values[0];
    for (std::size_t y = 0; y < block; ++y) {
      out.values[y] = k1 * (kernel.density(y) + kernel.density(kernel.negate(y)));
    }
    return out;
  }
  if (n == 3) {
    check_compatible(lower, kernel);
    const auto& k2 = lower.values;
    auto a = [&](std::size_t j) { return kernel.density(j); };
    for (std::size_t y1 = 0; y1 < block; ++y1) {
      const std::size_t ny1 = kernel.negate(y1);
      for (std::size_t y2 = 0; y2 < block; ++y2) {
        const std::size_t d12 = kernel.subtract(y1, y2);
        const std::size_t d21 = kernel.negate(d12);
        const std::size_t ny2 = kernel.negate(y2);
        out.values[y1 * block + y2] = k2[y2] * (a(d12) + a(y1)) + k2[y1] * (a(d21) + a(y2)) +
                                      k2[d12] * (a(ny1) + a(ny2));
      }
    }
    return out;
  }
  throw std::invalid_argument("source_term: supported orders are 2 and 3");
}

inline void check_finite(const std::vector<double>& v, int order, double t) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream msg;
      msg << "evolve: non-finite value at site " << i << " of order " << order << " at t=" << t;
      throw std::runtime_error(msg.str());
    }
  }
}

inline double max_stable_step(int order) { return 0.1 / order; }

/// Explicit midpoint for dk/dt = L_n* k + f(t). `source(t)` returns f at time t
/// (empty vector for f = 0).
template <class Source>
LatticeField evolve(const LatticeField& initial, const LatticeKernel& kernel, double t, double dt,
                    Source&& source) {
  check_compatible(initial, kernel);
  if (!(t >= 0.0)) throw std::invalid_argument("evolve: t must be non-negative");
  if (!(dt > 0.0) || dt > max_stable_step(initial.order) + 1e-15) {
    throw std::invalid_argument("evolve: dt must be in (0, 0.1/n]");
  }
  LatticeField k = initial;
  if (t == 0.0) return k;
  DualGenerator gen(kernel, initial.order);
  const long steps = static_cast<long>(std::ceil(t / dt - 1e-12));
  const double step = t / steps;
  std::vector<double> lk, mid(k.values.size());
  for (long s = 0; s < steps; ++s) {
    const double t0 = s * step;
    gen.apply(k.values, lk);
    const std::vector<double> f0 = source(t0);
    for (std::size_t i = 0; i < mid.size(); ++i) {
      mid[i] = k.values[i] + 0.5 * step * (lk[i] + (f0.empty() ? 0.0 : f0[i]));
    }
    gen.apply(mid, lk);
    const std::vector<double> fm = source(t0 + 0.5 * step);
    for (std::size_t i = 0; i < mid.size(); ++i) {
      k.values[i] += step * (lk[i] + (fm.empty() ? 0.0 : fm[i]));
    }
    check_finite(k.values, k.order, t0 + step);
  }
  return k;
}

inline LatticeField evolve_homogeneous(const LatticeField& initial, const LatticeKernel& kernel,
                                       double t, double dt) {
  return evolve(initial, kernel, t, dt, [](double) { return std::vector<double>{}; });
}

/// Joint midpoint evolution of orders 2..max_order from Poisson data
/// k_0^(n) = rho^n. Order n uses the order n-1 field at the same stage as its
/// source. Returns {k^(2), k^(3)?}.
inline std::vector<LatticeField> evolve_hierarchy(const LatticeKernel& kernel, double rho, double t,
                                                  double dt, int max_order = 2) {
  if (max_order < 2 || max_order > 3) throw std::invalid_argument("evolve: max_order must be 2 or 3");
  if (!(t >= 0.0)) throw std::invalid_argument("evolve: t must be non-negative");
  if (!(dt > 0.0) || dt > max_stable_step(max_order) + 1e-15) {
    throw std::invalid_argument("evolve: dt must be in (0, 0.1/n]");
  }
  const int d = kernel.dimension(), M = kernel.M();
  const double h = kernel.h();
  std::vector<LatticeField> fields;
  for (int n = 2; n <= max_order; ++n) fields.push_back(constant_field(d, M, h, n, rho, std::pow(rho, n)));
  if (t == 0.0) return fields;

  const LatticeField k1{d, M, h, 1, rho, {rho}};
  const auto f2 = source_term(k1, kernel).values;  // constant in time since k^(1) = rho
  std::vector<std::unique_ptr<DualGenerator>> gens;
  for (int n = 2; n <= max_order; ++n) gens.push_back(std::make_unique<DualGenerator>(kernel, n));

  const long steps = static_cast<long>(std::ceil(t / dt - 1e-12));
  const double step = t / steps;
  std::vector<double> lk;
  for (long s = 0; s < steps; ++s) {
    // stage 1: half step for every order from values at t0
    std::vector<LatticeField> half = fields;
    for (int n = 2; n <= max_order; ++n) {
      auto& cur = fields[n - 2];
      gens[n - 2]->apply(cur.values, lk);
      const std::vector<double>& f = n == 2 ? f2 : source_term(fields[0], kernel).values;
      for (std::size_t i = 0; i < lk.size(); ++i) half[n - 2].values[i] = cur.values[i] + 0.5 * step * (lk[i] + f[i]);
    }
    // stage 2: full step using midpoint values
    for (int n = 2; n <= max_order; ++n) {
      gens[n - 2]->apply(half[n - 2].values, lk);
      const std::vector<double>& f = n == 2 ? f2 : source_term(half[0], kernel).values;
      auto& cur = fields[n - 2];
      for (std::size_t i = 0; i < lk.size(); ++i) cur.values[i] += step * (lk[i] + f[i]);
      check_finite(cur.values, n, (s + 1) * step);
    }
  }
  return fields;
}

struct StationaryResult {
  LatticeField field;
  double horizon = 0.0;          // truncation time T
  double residual = 0.0;         // ||L k + P f||_sup / ||f||_sup
  double source_sup = 0.0;       // ||f||_sup
  double source_mean = 0.0;      // constant mode of f, projected out
};

/// k = rho^n + int_0^T e^{t L_n*} P f dt, where P removes the constant mode of
/// f (the only mode the lattice operator annihilates; on a finite torus it has
/// no stationary counterpart). The time integral is exact per Fourier mode and
/// T doubles until the increment over [T, 2T] falls below tol of the total.
inline StationaryResult stationary_from_source(const LatticeField& source, const LatticeKernel& kernel,
                                               double rho, double tol = 1e-4) {
  check_compatible(source, kernel);
  const int n = source.order;
  DualGenerator gen(kernel, n);
  const auto& f = source.values;
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(f.size());
  std::vector<double> pf(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) pf[i] = f[i] - mean;

  auto integral = [&](double T) {
    std::vector<double> out;
    gen.apply_multiplier(pf, out, [&](std::complex<double> s, std::size_t) -> std::complex<double> {
      if (std::abs(s) < 1e-300) return T;  // constant mode, already zero in pf
      if (s.imag() == 0.0) return std::expm1(T * s.real()) / s.real();
      return (std::exp(T * s) - 1.0) / s;
    });
    return out;
  };
  auto sup = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  double T = 1.0;
  std::vector<double> w = integral(T);
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<double> w2 = integral(2.0 * T);
    double inc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) inc = std::max(inc, std::abs(w2[i] - w[i]));
    w = std::move(w2);
    T *= 2.0;
    if (inc < tol * sup(w)) break;
  }
  StationaryResult res;
  res.horizon = T;
  res.source_sup = sup(f);
  res.source_mean = mean;
  res.field = source;
  res.field.values.resize(w.size());
  const double base = std::pow(rho, n);
  for (std::size_t i = 0; i < w.size(); ++i) res.field.values[i] = base + w[i];
  std::vector<double> lk;
  gen.apply(res.field.values, lk);
  for (std::size_t i = 0; i < lk.size(); ++i) lk[i] += pf[i];
  res.residual = res.source_sup > 0.0 ? sup(lk) / res.source_sup : 0.0;
  return res;
}

/// Stationary orders 2..max_order; refuses kernels whose small-p integral diverges.
inline std::vector<StationaryResult> stationary_fixed_point(const DispersalKernel& kernel,
                                                            const LatticeKernel& lattice,
                                                            double rho, int max_order = 2) {
  const auto rep = lemma1_diagnostic(kernel);
  if (!rep.finite) {
    throw std::domain_error("stationary_fixed_point: no invariant correlation functions for a "
                            "light-tailed kernel (small-p integral diverges)");
  }
  if (max_order < 2 || max_order > 3) throw std::invalid_argument("stationary: max_order must be 2 or 3");
  const int d = lattice.dimension(), M = lattice.M();
  std::vector<StationaryResult> out;
  LatticeField lower{d, M, lattice.h(), 1, rho, {rho}};
  for (int n = 2; n <= max_order; ++n) {
    out.push_back(stationary_from_source(source_term(lower, lattice), lattice, rho));
    lower = out.back().field;
  }
  return out;
}

/// Sup-norms K_n with constants fitted from orders 1 and 2: C = K2 / (4 K1),
/// D = 4 K1^2 / K2, so that K_n = D C^n (n!)^2 holds with equality for n <= 2.
struct HierarchyBounds {
  double C = 0.0;
  double D = 0.0;
  std::vector<double> K;  // K[0] = K_1, ...

  double bound(int n) const {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return D * std::pow(C, n) * f * f;
  }
  bool holds() const {
    for (std::size_t i = 0; i < K.size(); ++i) {
      if (K[i] > bound(static_cast<int>(i) + 1) * (1.0 + 1e-12)) return false;
    }
    return true;
  }
};

inline double sup_norm(const LatticeField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

inline HierarchyBounds fit_bounds(double rho, const std::vector<LatticeField>& fields) {
  HierarchyBounds b;
  b.K.push_back(std::abs(rho));
  for (const auto& f : fields) b.K.push_back(sup_norm(f));
  if (b.K.size() >= 2 && b.K[0] > 0.0 && b.K[1] > 0.0) {
    b.C = b.K[1] / (4.0 * b.K[0]);
    b.D = 4.0 * b.K[0] * b.K[0] / b.K[1];
  }
  return b;
}

struct DecayReport {
  std::vector<std::pair<double, double>> profile;  // (R, sup |k - rho^n| beyond separation R)
  double far_value = 0.0;       // k at the most separated lattice configuration
  double far_deviation = 0.0;   // |far_value - rho^n|
  double near_deviation = 0.0;  // |k - rho^n| at the smallest nonzero separation
  bool monotone = true;
};

/// Deviation of a field from rho^n as the minimum pairwise separation grows.
inline DecayReport decay_profile(const LatticeField& field, int shells = 16) {
  DecayReport rep;
  const int d = field.dimension, M = field.M;
  const double h = field.h;
  const double base = std::pow(field.rho, field.order);
  const std::size_t block = lattice_sites(d, M, 2);
  auto dist = [&](std::size_t j) {
    if (d == 1) return lattice_offset(static_cast<int>(j), M, h);
    return std::hypot(lattice_offset(static_cast<int>(j / M), M, h),
                      lattice_offset(static_cast<int>(j % M), M, h));
  };
  auto sub = [&](std::size_t i, std::size_t j) {
    if (d == 1) return (i + M - j) % M;
    return ((i / M + M - j / M) % M) * M + (i % M + M - j % M) % M;
  };
  std::vector<double> sep(field.values.size());
  if (field.order == 2) {
    for (std::size_t j = 0; j < block; ++j) sep[j] = dist(j);
  } else if (field.order == 3) {
    for (std::size_t a = 0; a < block; ++a) {
      for (std::size_t b = 0; b < block; ++b) {
        sep[a * block + b] = std::min({dist(a), dist(b), dist(sub(a, b))});
      }
    }
  } else {
    throw std::invalid_argument("decay_profile: order must be 2 or 3");
  }
  const double smax = *std::max_element(sep.begin(), sep.end());
  double near_sep = std::numeric_limits<double>::infinity();
  for (double s : sep) {
    if (s > 0.0) near_sep = std::min(near_sep, s);
  }
  double far_dev = -1.0;
  for (std::size_t i = 0; i < sep.size(); ++i) {
    const double dev = std::abs(field.values[i] - base);
    if (sep[i] == smax && dev > far_dev) {
      far_dev = dev;
      rep.far_value = field.values[i];
    }
    if (sep[i] == near_sep) rep.near_deviation = std::max(rep.near_deviation, dev);
  }
  rep.far_deviation = std::max(far_dev, 0.0);
  for (int s = 0; s <= shells; ++s) {
    const double R = smax * s / shells;
    double m = 0.0;
    for (std::size_t i = 0; i < sep.size(); ++i) {
      if (sep[i] >= R) m = std::max(m, std::abs(field.values[i] - base));
    }
    if (!rep.profile.empty() && m > rep.profile.back().second) rep.monotone = false;
    rep.profile.emplace_back(R, m);
  }
  return rep;
}

/// Order-2 field as (distance, value) over the lattice sites on the first
/// axis, 0 <= j <= M/2.
inline std::pair<std::vector<double>, std::vector<double>> radial_slice(const LatticeField& f) {
  std::vector<double> r, v;
  for (int j = 0; j <= f.M / 2; ++j) {
    r.push_back(j * f.h);
    v.push_back(f.values[f.dimension == 1 ? j : static_cast<std::size_t>(j) * f.M]);
  }
  return {r, v};
}

}  // namespace contact
