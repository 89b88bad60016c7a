#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "contact/quadrature.hpp"

namespace contact {

/// Position or displacement in d = 1 or 2 dimensions. In d = 1 only the first
/// coordinate is used and the second stays 0.
using Point = std::array<double, 2>;

inline double norm(const Point& x, int dim) {
  return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

enum class KernelFamily { SymmetricStable, Cauchy, Gaussian, CompactUniform };

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::SymmetricStable: return "SymmetricStable";
    case KernelFamily::Cauchy: return "Cauchy";
    case KernelFamily::Gaussian: return "Gaussian";
    case KernelFamily::CompactUniform: return "CompactUniform";
  }
  return "?";
}

inline KernelFamily family_from_string(std::string_view s) {
  if (s == "SymmetricStable") return KernelFamily::SymmetricStable;
  if (s == "Cauchy") return KernelFamily::Cauchy;
  if (s == "Gaussian") return KernelFamily::Gaussian;
  if (s == "CompactUniform") return KernelFamily::CompactUniform;
  throw std::invalid_argument("kernel.family: unknown family '" + std::string(s) + "'");
}

namespace stable {

/// Coefficients c_k of the large-r expansion of the unit isotropic stable
/// density, a(r) = sum_k c_k r^(-alpha k - d). Convergent for alpha < 1 and
/// asymptotic otherwise.
inline double log_abs_coefficient(double alpha, int d, int k) {
  return alpha * k * std::numbers::ln2 + std::lgamma(alpha * k / 2.0 + 1.0) +
         std::lgamma((alpha * k + d) / 2.0) - std::lgamma(k + 1.0) -
         (d / 2.0 + 1.0) * std::log(std::numbers::pi);
}

inline double coefficient_sign(double alpha, int k) {
  const double s = std::sin(std::numbers::pi * alpha * k / 2.0);
  return (k % 2 == 1) ? s : -s;
}

/// Sum of c_k r^(-alpha k - d) * weight(k), or nullopt when the series cannot
/// deliver ~12 significant digits at this r (divergence, cancellation).
template <class Weight>
std::optional<double> large_r_series(double alpha, int d, double r, Weight&& weight) {
  if (!(r > 0.0)) return std::nullopt;
  const double lr = std::log(r);
  double sum = 0.0, max_abs = 0.0, prev_abs = std::numeric_limits<double>::infinity();
  int small_run = 0;
  for (int k = 1; k <= 400; ++k) {
    const double sign = coefficient_sign(alpha, k);
    const double mag = std::exp(log_abs_coefficient(alpha, d, k) - (alpha * k + d) * lr) * weight(k);
    const double term = sign * mag;
    if (alpha > 1.0 && k > 2 && mag > prev_abs) {
      // asymptotic series: stop before the terms start growing
      if (prev_abs < 1e-13 * std::abs(sum)) return sum;
      return std::nullopt;
    }
    if (mag > 0.0 && std::abs(sign) > 1e-12) prev_abs = mag;
    sum += term;
    max_abs = std::max(max_abs, mag);
    if (mag < 1e-17 * std::abs(sum)) {
      if (++small_run >= 3) break;
    } else {
      small_run = 0;
    }
    if (k == 400) return std::nullopt;
  }
  if (!(std::abs(sum) > 0.0) || max_abs > 1e4 * std::abs(sum)) return std::nullopt;
  return sum;
}

inline std::optional<double> density_series(double alpha, int d, double r) {
  return large_r_series(alpha, d, r, [](int) { return 1.0; });
}

/// Mass outside the ball of radius r, by termwise integration of the large-r
/// expansion: c_k * S_d * r^(-alpha k) / (alpha k).
inline std::optional<double> tail_mass_series(double alpha, int d, double r) {
  const double surface = d == 1 ? 2.0 : 2.0 * std::numbers::pi;
  auto t = large_r_series(alpha, d, r, [&](int k) { return surface / (alpha * k); });
  if (!t) return std::nullopt;
  return *t * std::pow(r, d);
}

/// Unit-scale stable density by direct Fourier inversion of exp(-p^alpha).
inline double density_quadrature(double alpha, int d, double r) {
  const double p_max = std::pow(46.0, 1.0 / alpha);
  const double lo = 1e-12;
  const auto breaks = graded_breaks(lo, 1.0, p_max, r, 0.5, 1.5, 1);
  if (d == 1) {
    auto f = [&](double p) { return std::cos(p * r) * std::exp(-std::pow(p, alpha)); };
    return (integrate_panels(f, breaks, 16) + lo) / std::numbers::pi;
  }
  auto f = [&](double p) {
    return std::cyl_bessel_j(0.0, p * r) * std::exp(-std::pow(p, alpha)) * p;
  };
  return integrate_panels(f, breaks, 16) / (2.0 * std::numbers::pi);
}

/// Unit-scale isotropic stable density with characteristic function
/// exp(-|p|^alpha), evaluated at radius r >= 0.
inline double density(double alpha, int d, double r) {
  r = std::abs(r);
  if (alpha == 1.0) {
    return d == 1 ? 1.0 / (std::numbers::pi * (1.0 + r * r))
                  : 1.0 / (2.0 * std::numbers::pi * std::pow(1.0 + r * r, 1.5));
  }
  if (alpha == 2.0) {
    return d == 1 ? std::exp(-r * r / 4.0) / std::sqrt(4.0 * std::numbers::pi)
                  : std::exp(-r * r / 4.0) / (4.0 * std::numbers::pi);
  }
  if (r > 0.0) {
    if (auto s = density_series(alpha, d, r)) return *s;
  }
  return density_quadrature(alpha, d, r);
}

/// Positive stable variate with Laplace transform exp(-lambda^beta), 0 < beta < 1
/// (Kanter's representation).
template <class Rng>
double positive_stable(double beta, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, std::numbers::pi);
  std::exponential_distribution<double> expo(1.0);
  double u = unif(rng);
  while (u == 0.0) u = unif(rng);
  const double w = expo(rng);
  const double a = std::sin((1.0 - beta) * u) * std::pow(std::sin(beta * u), beta / (1.0 - beta)) /
                   std::pow(std::sin(u), 1.0 / (1.0 - beta));
  return std::pow(a / w, (1.0 - beta) / beta);
}

/// Symmetric stable variate in d = 1 with characteristic function exp(-|p|^alpha)
/// (Chambers-Mallows-Stuck).
template <class Rng>
double symmetric_stable_1d(double alpha, Rng& rng) {
  std::uniform_real_distribution<double> unif(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
  std::exponential_distribution<double> expo(1.0);
  double u = unif(rng);
  while (std::abs(u) >= std::numbers::pi / 2.0) u = unif(rng);
  if (alpha == 1.0) return std::tan(u);
  const double w = expo(rng);
  return std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
}

}  // namespace stable

/// Dispersal density a on R^d with Fourier transform a_hat, tail exponent and
/// an exact displacement sampler. Immutable after construction; all shipped
/// families are even, so a_hat is real.
///
/// Families (scale s):
///  - SymmetricStable(alpha): a_hat(p) = exp(-|s p|^alpha), 0 < alpha <= 2.
///  - Cauchy: SymmetricStable with alpha = 1, closed-form density.
///  - Gaussian: a_hat(p) = exp(-s^2 |p|^2 / 2).
///  - CompactUniform: law of the sum of two independent uniform points in the
///    ball of radius s/2; support radius s and an integrable a_hat
///    (tent function in d = 1).
class DispersalKernel {
 public:
  DispersalKernel(KernelFamily family, int dimension, double alpha = 1.0, double scale = 1.0)
      : family_(family), dim_(dimension), alpha_(alpha), scale_(scale) {
    if (dimension != 1 && dimension != 2) {
      throw std::invalid_argument("kernel.dimension: must be 1 or 2, got " +
                                  std::to_string(dimension));
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw std::invalid_argument("kernel.scale: must be positive and finite");
    }
    switch (family) {
      case KernelFamily::SymmetricStable:
        if (!(alpha > 0.0 && alpha <= 2.0)) {
          std::ostringstream msg;
          msg << "kernel.alpha: must be in (0, 2] for SymmetricStable, got " << alpha;
          throw std::invalid_argument(msg.str());
        }
        break;
      case KernelFamily::Cauchy: alpha_ = 1.0; break;
      case KernelFamily::Gaussian: alpha_ = 2.0; break;
      case KernelFamily::CompactUniform: alpha_ = 2.0; break;
    }
  }

  static DispersalKernel symmetric_stable(int dim, double alpha, double scale = 1.0) {
    return {KernelFamily::SymmetricStable, dim, alpha, scale};
  }
  static DispersalKernel cauchy(int dim, double scale = 1.0) {
    return {KernelFamily::Cauchy, dim, 1.0, scale};
  }
  static DispersalKernel gaussian(int dim, double scale = 1.0) {
    return {KernelFamily::Gaussian, dim, 2.0, scale};
  }
  static DispersalKernel compact_uniform(int dim, double scale = 1.0) {
    return {KernelFamily::CompactUniform, dim, 2.0, scale};
  }

  KernelFamily family() const { return family_; }
  int dimension() const { return dim_; }
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }

  bool is_stable() const {
    return family_ == KernelFamily::SymmetricStable || family_ == KernelFamily::Cauchy;
  }

  /// Power-law tail exponent alpha in a(x) ~ |x|^-(alpha + d); nullopt for
  /// light tails (finite second moment).
  std::optional<double> tail_exponent() const {
    if (is_stable() && alpha_ < 2.0) return alpha_;
    return std::nullopt;
  }

  /// True iff a decays like |x|^-(alpha+d) with 0 < alpha < 1 (d = 1) or
  /// 0 < alpha < 2 (d = 2).
  bool heavy_tail() const {
    if (!is_stable()) return false;
    return dim_ == 1 ? alpha_ < 1.0 : alpha_ < 2.0;
  }

  double density_radial(double r) const {
    if (!std::isfinite(r)) throw std::invalid_argument("density: non-finite argument");
    r = std::abs(r);
    const double s = scale_;
    const double sd = dim_ == 1 ? s : s * s;
    const double pi = std::numbers::pi;
    switch (family_) {
      case KernelFamily::SymmetricStable:
      case KernelFamily::Cauchy:
        return stable::density(alpha_, dim_, r / s) / sd;
      case KernelFamily::Gaussian:
        return std::exp(-0.5 * r * r / (s * s)) / std::pow(2.0 * pi * s * s, dim_ / 2.0);
      case KernelFamily::CompactUniform: {
        if (r >= s) return 0.0;
        if (dim_ == 1) return (s - r) / (s * s);
        const double R = 0.5 * s;
        const double lens = 2.0 * R * R * std::acos(r / (2.0 * R)) -
                            0.5 * r * std::sqrt(4.0 * R * R - r * r);
        const double area = pi * R * R;
        return lens / (area * area);
      }
    }
    return 0.0;
  }

  double density(const Point& x) const {
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) {
      throw std::invalid_argument("density: non-finite argument");
    }
    return density_radial(norm(x, dim_));
  }

  /// a_hat as a function of |p|.
  double hat(double p) const {
    p = std::abs(p);
    const double z = p * scale_;
    switch (family_) {
      case KernelFamily::SymmetricStable:
      case KernelFamily::Cauchy:
        return std::exp(-std::pow(z, alpha_));
      case KernelFamily::Gaussian:
        return std::exp(-0.5 * z * z);
      case KernelFamily::CompactUniform: {
        const double b = compact_base(z);
        return b * b;
      }
    }
    return 0.0;
  }

  std::complex<double> hat(const Point& p) const { return {hat(norm(p, dim_)), 0.0}; }

  /// 1 - a_hat(|p|), accurate near p = 0.
  double one_minus_hat(double p) const {
    p = std::abs(p);
    const double z = p * scale_;
    switch (family_) {
      case KernelFamily::SymmetricStable:
      case KernelFamily::Cauchy:
        return -std::expm1(-std::pow(z, alpha_));
      case KernelFamily::Gaussian:
        return -std::expm1(-0.5 * z * z);
      case KernelFamily::CompactUniform: {
        if (dim_ == 1) {
          const double h = 0.5 * z;
          if (h < 1e-3) return h * h / 3.0 - 2.0 * std::pow(h, 4) / 45.0;
        } else {
          const double h = 0.5 * z;
          if (h < 1e-3) return h * h / 4.0 - 5.0 * std::pow(h, 4) / 192.0;
        }
        return 1.0 - hat(p);
      }
    }
    return 0.0;
  }

  /// Smallest |p| beyond which |a_hat| < eps.
  double hat_cutoff(double eps = 1e-12) const {
    const double l = -std::log(eps);
    switch (family_) {
      case KernelFamily::SymmetricStable:
      case KernelFamily::Cauchy:
        return std::pow(l, 1.0 / alpha_) / scale_;
      case KernelFamily::Gaussian:
        return std::sqrt(2.0 * l) / scale_;
      case KernelFamily::CompactUniform:
        // |a_hat| <= (2/h)^2 (d=1) or ~ (8/pi) h^-3 (d=2) with h = |p| s / 2
        return dim_ == 1 ? 4.0 / std::sqrt(eps) / scale_
                         : 2.0 * std::cbrt(8.0 / (std::numbers::pi * eps)) / scale_;
    }
    return 0.0;
  }

  /// Mass outside the ball of radius r.
  double tail_mass(double r) const {
    r = std::abs(r);
    const double s = scale_;
    switch (family_) {
      case KernelFamily::SymmetricStable:
      case KernelFamily::Cauchy: {
        const double z = r / s;
        if (alpha_ == 1.0 && dim_ == 1) return 1.0 - 2.0 * std::atan(z) / std::numbers::pi;
        if (alpha_ == 1.0 && dim_ == 2) return 1.0 / std::sqrt(1.0 + z * z);
        if (alpha_ == 2.0) {
          return dim_ == 1 ? std::erfc(z / 2.0) : std::exp(-z * z / 4.0);
        }
        if (auto t = stable::tail_mass_series(alpha_, dim_, z)) return *t;
        return std::numeric_limits<double>::quiet_NaN();
      }
      case KernelFamily::Gaussian: {
        const double z = r / s;
        return dim_ == 1 ? std::erfc(z / std::numbers::sqrt2) : std::exp(-0.5 * z * z);
      }
      case KernelFamily::CompactUniform:
        if (r >= s) return 0.0;
        return std::numeric_limits<double>::quiet_NaN();
    }
    return 0.0;
  }

  /// Random displacement with density a. Deterministic given the generator state.
  template <class Rng>
  Point sample(Rng& rng) const {
    const double s = scale_;
    switch (family_) {
      case KernelFamily::SymmetricStable:
      case KernelFamily::Cauchy: {
        if (dim_ == 1) {
          if (alpha_ == 2.0) {
            std::normal_distribution<double> n(0.0, std::numbers::sqrt2);
            return {s * n(rng), 0.0};
          }
          return {s * stable::symmetric_stable_1d(alpha_, rng), 0.0};
        }
        // isotropic vector as a Gaussian scale mixture: sqrt(A) * N(0, 2 I) with
        // A positive stable of index alpha/2, so E exp(i p.X) = exp(-|p|^alpha)
        const double mix = alpha_ == 2.0 ? 1.0 : stable::positive_stable(alpha_ / 2.0, rng);
        std::normal_distribution<double> n(0.0, std::numbers::sqrt2);
        const double root = std::sqrt(mix);
        const double g0 = n(rng), g1 = n(rng);
        return {s * root * g0, s * root * g1};
      }
      case KernelFamily::Gaussian: {
        std::normal_distribution<double> n(0.0, s);
        if (dim_ == 1) return {n(rng), 0.0};
        const double g0 = n(rng), g1 = n(rng);
        return {g0, g1};
      }
      case KernelFamily::CompactUniform: {
        if (dim_ == 1) {
          std::uniform_real_distribution<double> u(-0.5 * s, 0.5 * s);
          const double u0 = u(rng), u1 = u(rng);
          return {u0 + u1, 0.0};
        }
        Point out{0.0, 0.0};
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 2; ++i) {
          const double rad = 0.5 * s * std::sqrt(u(rng));
          const double ang = 2.0 * std::numbers::pi * u(rng);
          out[0] += rad * std::cos(ang);
          out[1] += rad * std::sin(ang);
        }
        return out;
      }
    }
    return {0.0, 0.0};
  }

 private:
  // sinc(h) in d = 1 and 2 J1(h)/h in d = 2, with h = z/2
  double compact_base(double z) const {
    const double h = 0.5 * z;
    if (h < 1e-8) return 1.0;
    if (dim_ == 1) return std::sin(h) / h;
    return 2.0 * std::cyl_bessel_j(1.0, h) / h;
  }

  KernelFamily family_;
  int dim_;
  double alpha_;
  double scale_;
};

/// Jump kernel J = mass * (probability density of the given shape). The mass
/// J_hat(0) is the per-particle relocation rate and need not equal 1.
struct JumpKernel {
  DispersalKernel shape;
  double mass = 1.0;

  JumpKernel(DispersalKernel s, double m) : shape(s), mass(m) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw std::invalid_argument("jump.mass: must be non-negative and finite");
    }
  }

  double hat(double p) const { return mass * shape.hat(p); }
  /// J_hat(0) - J_hat(p)
  double deficit(double p) const { return mass * shape.one_minus_hat(p); }
};

/// Numeric checks of the kernel conditions: normalization, |a_hat| < 1 away
/// from 0, power-law tail slope and the heavy-tail flag.
struct ValidationReport {
  double norm_residual = 0.0;
  double max_abs_hat = 0.0;
  double tail_slope = std::numeric_limits<double>::quiet_NaN();
  bool heavy_tail = false;
  bool normalized = false;
  bool hat_bounded = false;
};

inline double normalization_tolerance(int dim) { return dim == 1 ? 1e-6 : 1e-4; }

inline ValidationReport validate(const DispersalKernel& k) {
  ValidationReport rep;
  const int d = k.dimension();
  const double s = k.scale();
  const double jac_c = d == 1 ? 2.0 : 2.0 * std::numbers::pi;

  double radius = 0.0;
  switch (k.family()) {
    case KernelFamily::SymmetricStable:
    case KernelFamily::Cauchy: radius = (k.alpha() == 2.0 ? 20.0 : 50.0) * s; break;
    case KernelFamily::Gaussian: radius = 12.0 * s; break;
    case KernelFamily::CompactUniform: radius = s; break;
  }
  auto radial = [&](double r) {
    return jac_c * (d == 2 ? r : 1.0) * k.density_radial(r);
  };
  // the density can be sharply peaked at 0 for small alpha; split the range
  std::vector<double> cuts{0.0};
  for (double c = 1e-3 * s; c < radius; c *= 4.0) cuts.push_back(c);
  cuts.push_back(radius);
  double inner = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    inner += integrate_adaptive(radial, cuts[i], cuts[i + 1], 1e-13, 1e-11, 30);
  }
  const double tail = k.tail_mass(radius);
  rep.norm_residual = std::abs(inner + (std::isfinite(tail) ? tail : 0.0) - 1.0);
  rep.normalized = rep.norm_residual < normalization_tolerance(d);

  double max_hat = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double p = std::pow(10.0, -4.0 + 8.0 * i / 4000.0) / s;
    max_hat = std::max(max_hat, std::abs(k.hat(p)));
  }
  rep.max_abs_hat = max_hat;
  rep.hat_bounded = max_hat < 1.0;

  std::vector<double> xs, ys;
  bool underflow = false;
  for (int i = 0; i < 16; ++i) {
    const double r = s * std::pow(10.0, 1.0 + i / 15.0);
    const double v = k.density_radial(r);
    if (!(v > 1e-300)) underflow = true;
    xs.push_back(r);
    ys.push_back(v);
  }
  if (!underflow) rep.tail_slope = log_log_slope(xs, ys);
  rep.heavy_tail = k.heavy_tail();
  return rep;
}

}  // namespace contact
