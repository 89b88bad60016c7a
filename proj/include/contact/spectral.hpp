#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "contact/kernel.hpp"
#include "contact/quadrature.hpp"

namespace contact {

/// Pair correlation k(r) on a radial grid. `time` is empty for the stationary field.
struct SpectralField {
  int dimension = 1;
  std::vector<double> radii;
  std::vector<double> values;
  double rho = 0.0;
  std::optional<double> time;

  /// u(r) = k(r) - rho^2
  std::vector<double> excess() const {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - rho * rho;
    return out;
  }
};

struct Lemma1Report {
  bool finite = false;
  double value = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> cutoff_series;  // (eps, integral over |p| > eps)
  double small_p_exponent = std::numeric_limits<double>::quiet_NaN();
  double c1 = std::numeric_limits<double>::quiet_NaN();  // fitted 2 - (a_hat(p) + a_hat(-p)) ~ c1 |p|^alpha
};

/// Resolution knobs for the radial Fourier quadrature.
struct SpectralOptions {
  double hat_eps = 1e-12;        // integrate |p| up to where |a_hat| < hat_eps
  double lo = 1e-12;             // graded mesh bottom; [0, lo] handled analytically
  double knee = 1.0;             // graded below, geometric growth above
  double grading = 0.5;
  double growth = 1.25;
  int panels_per_halfwave = 2;
  int order = 16;
  double max_frequency = 0.0;    // 0: 5000 / scale cap for slowly decaying a_hat

  /// Same quadrature at doubled resolution.
  SpectralOptions refined() const {
    SpectralOptions o = *this;
    o.grading = std::sqrt(grading);
    o.growth = std::sqrt(growth);
    o.panels_per_halfwave = 2 * panels_per_halfwave;
    return o;
  }
};

/// Finite torus [0, L)^d with optional lattice cell width for cell-averaged
/// comparisons against lattice solutions.
struct TorusGeometry {
  double length = 0.0;
  double cell = 0.0;
  bool include_zero_mode = true;
};

/// The closed-form Fourier representation of the pair correlation for Poisson
/// initial data:
///   k_t(x) = rho^2 + rho (2 pi)^-d  int e^{ipx} G_t(p) dp,
///   G_t = N (1 - e^{-t D}) / D,  G_inf = N / D,
/// with N = 2 a_hat and D = 2 - 2 a_hat (+ 2 (J_hat(0) - J_hat(p)) with jumps).
class SpectralModel {
 public:
  explicit SpectralModel(DispersalKernel kernel, std::optional<JumpKernel> jump = std::nullopt,
                         SpectralOptions opts = {})
      : kernel_(kernel), jump_(jump), opts_(opts) {
    if (jump_ && jump_->shape.dimension() != kernel_.dimension()) {
      throw std::invalid_argument("jump.dimension: must match kernel dimension");
    }
  }

  const DispersalKernel& kernel() const { return kernel_; }
  const std::optional<JumpKernel>& jump() const { return jump_; }
  const SpectralOptions& options() const { return opts_; }
  int dimension() const { return kernel_.dimension(); }

  double numerator(double p) const { return 2.0 * kernel_.hat(p); }

  double denominator(double p) const {
    double d = 2.0 * kernel_.one_minus_hat(p);
    // each of the two particles relocates independently, so the jump symbol
    // enters once per coordinate
    if (jump_) d += 2.0 * jump_->deficit(p);
    return d;
  }

  double stationary_symbol(double p) const { return numerator(p) / denominator(p); }

  double time_symbol(double p, double t) const {
    const double n = numerator(p);
    if (t <= 0.0) return 0.0;
    const double d = denominator(p);
    if (!(d > 0.0)) return n * t;
    return n * (-std::expm1(-t * d)) / d;
  }

  double cutoff() const {
    double c = kernel_.hat_cutoff(opts_.hat_eps);
    const double cap = opts_.max_frequency > 0 ? opts_.max_frequency : 5000.0 / kernel_.scale();
    return std::min(c, cap);
  }

  Lemma1Report lemma1() const {
    Lemma1Report rep;
    const int d = dimension();
    auto integrand = [&](double p) {
      const double jac = d == 1 ? 2.0 : 2.0 * std::numbers::pi * p;
      return jac * std::abs(kernel_.hat(p)) / denominator(p);
    };
    const double pmax = cutoff();
    const double top = 0.1;
    double acc = integrate_panels(integrand, graded_breaks(top, 1.0, pmax, 0.0, 0.5, 1.25), 16);
    rep.cutoff_series.emplace_back(top, acc);
    double eps = top;
    for (int k = 2; k <= 9; ++k) {
      const double next = std::pow(10.0, -k);
      acc += integrate_panels(integrand, graded_breaks(next, eps, eps, 0.0, 0.5), 16);
      rep.cutoff_series.emplace_back(next, acc);
      eps = next;
    }
    // Cauchy test over the last three decades
    bool converging = std::isfinite(acc);
    const auto& cs = rep.cutoff_series;
    for (std::size_t i = cs.size() - 3; i < cs.size(); ++i) {
      if (!(cs[i].second < 1.05 * cs[i - 1].second)) converging = false;
    }
    const double rem = power_law_remainder(integrand, eps);
    rep.finite = converging && std::isfinite(rem);
    rep.value = rep.finite ? acc + rem : std::numeric_limits<double>::infinity();

    std::vector<double> ps, gs, ds;
    for (int i = 0; i <= 30; ++i) {
      const double p = std::pow(10.0, -8.0 + 3.0 * i / 30.0);
      ps.push_back(p);
      gs.push_back(std::abs(kernel_.hat(p)) / denominator(p));
      ds.push_back(denominator(p));
    }
    rep.small_p_exponent = log_log_slope(ps, gs);
    // c1 from the leading term of the denominator at the smallest probe
    const double dslope = log_log_slope(ps, ds);
    rep.c1 = ds.front() / std::pow(ps.front(), dslope);
    return rep;
  }

  /// Infinite-domain stationary k(r).
  SpectralField stationary(double rho, const std::vector<double>& radii) const {
    const auto rep = lemma1();
    if (!rep.finite) {
      throw std::domain_error(
          "stationary pair correlation does not exist: the small-p integral diverges "
          "(lemma1 cutoff series fails the Cauchy test, fitted exponent " +
          std::to_string(rep.small_p_exponent) + ")");
    }
    SpectralField f{dimension(), radii, {}, rho, std::nullopt};
    f.values = radial_transform([&](double p) { return stationary_symbol(p); }, radii, rho, true);
    return f;
  }

  /// Infinite-domain k_t(r) from Poisson initial data.
  SpectralField at_time(double rho, double t, const std::vector<double>& radii) const {
    if (!(t >= 0.0)) throw std::invalid_argument("time: must be non-negative");
    SpectralField f{dimension(), radii, {}, rho, t};
    if (t == 0.0) {
      f.values.assign(radii.size(), rho * rho);
      return f;
    }
    f.values = radial_transform([&](double p) { return time_symbol(p, t); }, radii, rho, false);
    return f;
  }

  /// k_t(r) on the torus, as a Fourier series over q = 2 pi m / L. A missing
  /// time means the stationary field, whose constant mode is dropped (no
  /// stationary zero mode exists on a finite torus).
  SpectralField torus(double rho, std::optional<double> t, const std::vector<double>& radii,
                      const TorusGeometry& geo) const {
    SpectralField f{dimension(), radii, {}, rho, t};
    f.values = torus_sum(rho, t, geo, radii.size(), [&](double q, std::size_t i) {
      return radial_wave(q, radii[i]);
    });
    return f;
  }

  /// Torus k_t averaged over the distance shells [edges[i], edges[i+1]).
  std::vector<double> torus_bin_average(double rho, std::optional<double> t,
                                        const std::vector<double>& edges,
                                        const TorusGeometry& geo) const {
    if (edges.size() < 2) throw std::invalid_argument("bin edges: need at least two");
    return torus_sum(rho, t, geo, edges.size() - 1, [&](double q, std::size_t i) {
      return shell_wave(q, edges[i], edges[i + 1]);
    });
  }

  /// Constant Fourier mode of the torus field: torus mean of k_t minus rho^2.
  double torus_zero_mode(double rho, std::optional<double> t, double length) const {
    if (!t) return 0.0;
    return rho * time_symbol(0.0, *t) / std::pow(length, dimension());
  }

 private:
  // angular average of e^{i q x} over the sphere |x| = r
  double radial_wave(double q, double r) const {
    return dimension() == 1 ? std::cos(q * r) : std::cyl_bessel_j(0.0, q * std::abs(r));
  }

  // the same, averaged over the shell r1 <= |x| < r2 with the volume measure
  double shell_wave(double q, double r1, double r2) const {
    if (q == 0.0) return 1.0;
    if (dimension() == 1) return (std::sin(q * r2) - std::sin(q * r1)) / (q * (r2 - r1));
    auto prim = [&](double r) { return r > 0.0 ? r * std::cyl_bessel_j(1.0, q * r) / q : 0.0; };
    return 2.0 * (prim(r2) - prim(r1)) / (r2 * r2 - r1 * r1);
  }

  template <class Symbol>
  std::vector<double> radial_transform(Symbol&& g, const std::vector<double>& radii, double rho,
                                       bool singular) const {
    const int d = dimension();
    std::vector<double> out(radii.size(), rho * rho);
    if (rho == 0.0) {
      out.assign(radii.size(), 0.0);
      return out;
    }
    double rmax = 0.0;
    for (double r : radii) rmax = std::max(rmax, std::abs(r));
    const auto breaks = graded_breaks(opts_.lo, opts_.knee, cutoff(), rmax, opts_.grading,
                                      opts_.growth, opts_.panels_per_halfwave);
    const auto& rule = gauss_legendre(opts_.order);
    std::vector<double> nodes, weights;
    nodes.reserve((breaks.size() - 1) * rule.nodes.size());
    weights.reserve(nodes.capacity());
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      const double a = breaks[i], b = breaks[i + 1];
      const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double p = mid + half * rule.nodes[k];
        nodes.push_back(p);
        const double jac = d == 1 ? 1.0 : p;
        weights.push_back(half * rule.weights[k] * jac * g(p));
      }
    }
    auto radial = [&](double p) { return (d == 1 ? 1.0 : p) * g(p); };
    const double rem = singular ? power_law_remainder(radial, opts_.lo) : radial(opts_.lo) * opts_.lo;
    const double pref = d == 1 ? rho / std::numbers::pi : rho / (2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      double s = rem;
      const double r = std::abs(radii[i]);
      for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * radial_wave(nodes[k], r);
      out[i] += pref * s;
    }
    return out;
  }

  template <class Wave>
  std::vector<double> torus_sum(double rho, std::optional<double> t, const TorusGeometry& geo,
                                std::size_t count, Wave&& wave) const {
    const double L = geo.length;
    if (!(L > 0.0)) throw std::invalid_argument("torus_length: must be positive");
    if (t && !(*t >= 0.0)) throw std::invalid_argument("time: must be non-negative");
    const int d = dimension();
    const double vol = std::pow(L, d);
    std::vector<double> out(count, rho * rho);
    if (rho == 0.0) {
      out.assign(count, 0.0);
      return out;
    }
    if (t && *t == 0.0) return out;
    auto symbol = [&](double q) { return t ? time_symbol(q, *t) : stationary_symbol(q); };
    auto cell = [&](double q) {
      if (geo.cell <= 0.0 || q == 0.0) return 1.0;
      const double z = 0.5 * q * geo.cell;
      return std::sin(z) / z;
    };
    const double dq = 2.0 * std::numbers::pi / L;
    const long mmax = static_cast<long>(std::floor(cutoff() / dq));
    // (|q|, summed weight) over the nonzero modes
    std::vector<std::pair<double, double>> modes;
    if (d == 1) {
      for (long m = 1; m <= mmax; ++m) {
        const double q = dq * m;
        modes.emplace_back(q, 2.0 * cell(q) * symbol(q));
      }
    } else {
      std::map<long, double> shells;
      for (long m1 = -mmax; m1 <= mmax; ++m1) {
        for (long m2 = -mmax; m2 <= mmax; ++m2) {
          const long n2 = m1 * m1 + m2 * m2;
          if (n2 == 0 || n2 > mmax * mmax) continue;
          shells[n2] += cell(dq * m1) * cell(dq * m2);
        }
      }
      modes.reserve(shells.size());
      for (const auto& [n2, w] : shells) {
        const double q = dq * std::sqrt(static_cast<double>(n2));
        modes.emplace_back(q, w * symbol(q));
      }
    }
    const double zero = (t && geo.include_zero_mode) ? time_symbol(0.0, *t) : 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      double s = zero;
      for (const auto& [q, w] : modes) s += w * wave(q, i);
      out[i] += rho * s / vol;
    }
    return out;
  }

  DispersalKernel kernel_;
  std::optional<JumpKernel> jump_;
  SpectralOptions opts_;
};

inline Lemma1Report lemma1_diagnostic(const DispersalKernel& kernel,
                                      const std::optional<JumpKernel>& jump = std::nullopt) {
  return SpectralModel(kernel, jump).lemma1();
}

inline SpectralField stationary_pair_correlation(const DispersalKernel& kernel, double rho,
                                                 const std::vector<double>& radii) {
  return SpectralModel(kernel).stationary(rho, radii);
}

inline SpectralField pair_correlation_at_time(const DispersalKernel& kernel, double rho, double t,
                                              const std::vector<double>& radii) {
  return SpectralModel(kernel).at_time(rho, t, radii);
}

struct GrowthCurve {
  std::vector<std::pair<double, double>> points;  // (t, k_t(0))
  double exponent = std::numeric_limits<double>::quiet_NaN();       // log-log fit over the grid
  double last_exponent = std::numeric_limits<double>::quiet_NaN();  // over the final interval
  std::string classification;                                       // "convergent" / "divergent"
};

/// On-diagonal k_t(0) over a time grid, with the log-log growth exponent of
/// k_t(0) itself. Curves whose final-interval exponent exceeds 0.1 are
/// classified divergent.
inline GrowthCurve clustering_growth_curve(const SpectralModel& model, double rho,
                                           const std::vector<double>& t_grid) {
  GrowthCurve c;
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("t_grid: must be increasing");
  }
  std::vector<double> ts, ks;
  for (double t : t_grid) {
    const double k0 = model.at_time(rho, t, {0.0}).values[0];
    c.points.emplace_back(t, k0);
    ts.push_back(t);
    ks.push_back(k0);
  }
  if (rho == 0.0) {
    c.exponent = c.last_exponent = 0.0;
    c.classification = "convergent";
    return c;
  }
  c.exponent = log_log_slope(ts, ks);
  if (ts.size() >= 2) {
    const std::size_t n = ts.size();
    c.last_exponent = std::log(ks[n - 1] / ks[n - 2]) / std::log(ts[n - 1] / ts[n - 2]);
  }
  c.classification = c.last_exponent > 0.1 ? "divergent" : "convergent";
  return c;
}

}  // namespace contact
