#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace contact {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussRule make_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace detail

/// Cached Gauss-Legendre rule of order n (2 <= n <= 64).
inline const GaussRule& gauss_legendre(int n) {
  if (n < 2 || n > 64) throw std::invalid_argument("gauss_legendre: order must be in [2, 64]");
  static const auto table = [] {
    std::array<GaussRule, 65> t{};
    for (int k = 2; k <= 64; ++k) t[k] = detail::make_gauss_legendre(k);
    return t;
  }();
  return table[n];
}

/// Sum of Gauss-Legendre panel integrals over consecutive breakpoints.
template <class F>
double integrate_panels(F&& f, const std::vector<double>& breaks, int order = 16) {
  const auto& g = gauss_legendre(order);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (int k = 0; k < order; ++k) s += g.weights[k] * f(mid + half * g.nodes[k]);
    total += half * s;
  }
  return total;
}

namespace detail {

template <class F>
double gl_once(F& f, double a, double b, int order) {
  const auto& g = gauss_legendre(order);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (int k = 0; k < order; ++k) s += g.weights[k] * f(mid + half * g.nodes[k]);
  return half * s;
}

template <class F>
double adaptive_step(F& f, double a, double b, double whole, double abs_tol, double rel_tol,
                     int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl_once(f, a, m, 15);
  const double right = gl_once(f, m, b, 15);
  const double both = left + right;
  const double err = std::abs(both - whole);
  if (depth <= 0 || err <= std::max(abs_tol, rel_tol * std::abs(both))) return both;
  return adaptive_step(f, a, m, left, 0.5 * abs_tol, rel_tol, depth - 1) +
         adaptive_step(f, m, b, right, 0.5 * abs_tol, rel_tol, depth - 1);
}

}  // namespace detail

/// Adaptive bisection with a 15-point Gauss-Legendre rule on each half.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-12,
                          double rel_tol = 1e-10, int max_depth = 40) {
  if (a == b) return 0.0;
  double whole = detail::gl_once(f, a, b, 15);
  return detail::adaptive_step(f, a, b, whole, abs_tol, rel_tol, max_depth);
}

/// Breakpoints for integrals over [lo, hi] whose integrand is singular or
/// non-smooth at 0 and oscillates with angular frequency `omega` in p.
///
/// Panels shrink geometrically (ratio `grading`) from `knee` down to `lo` and
/// grow geometrically (ratio `growth`) from `knee` up to `hi`. Every panel is
/// then split so that it spans at most 1/panels_per_halfwave of pi/omega.
inline std::vector<double> graded_breaks(double lo, double knee, double hi, double omega,
                                         double grading = 0.5, double growth = 1.5,
                                         int panels_per_halfwave = 1) {
  std::vector<double> coarse;
  knee = std::min(knee, hi);
  if (lo < knee) {
    std::vector<double> down;
    for (double p = knee; p > lo; p *= grading) down.push_back(p);
    down.push_back(lo);
    coarse.assign(down.rbegin(), down.rend());
  } else {
    coarse.push_back(lo);
  }
  for (double p = coarse.back(); p < hi;) {
    p = std::min(hi, std::max(p * growth, p + 1e-300));
    coarse.push_back(p);
  }
  const double limit = omega > 0 ? std::numbers::pi / (omega * panels_per_halfwave)
                                 : std::numeric_limits<double>::infinity();
  std::vector<double> out;
  out.reserve(coarse.size());
  out.push_back(coarse.front());
  for (std::size_t i = 1; i < coarse.size(); ++i) {
    const double a = coarse[i - 1], b = coarse[i];
    const long n = std::max(1L, static_cast<long>(std::ceil((b - a) / limit)));
    for (long k = 1; k <= n; ++k) out.push_back(k == n ? b : a + (b - a) * k / n);
  }
  return out;
}

/// Integral of f over [0, lo] for f ~ C p^(-gamma) near 0, estimated from f(lo)
/// and f(2 lo). Returns +inf when the local exponent is not integrable.
template <class F>
double power_law_remainder(F&& f, double lo) {
  const double f1 = f(lo), f2 = f(2.0 * lo);
  if (!(f1 > 0.0) || !(f2 > 0.0)) return f1 * lo;
  const double gamma = -std::log2(f2 / f1);
  if (gamma >= 1.0) return std::numeric_limits<double>::infinity();
  return f1 * lo / (1.0 - gamma);
}

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace contact
