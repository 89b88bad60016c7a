#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "contact/simulator.hpp"
#include "contact/spectral.hpp"
#include "contact/stats.hpp"

namespace contact {

/// Minimum-image distance on the torus.
inline double torus_distance(const Point& a, const Point& b, int dim, double L) {
  auto axis = [L](double u, double v) {
    double d = std::abs(u - v);
    return std::min(d, L - d);
  };
  const double dx = axis(a[0], b[0]);
  if (dim == 1) return dx;
  return std::hypot(dx, axis(a[1], b[1]));
}

/// Ordered-pair distance histogram over [0, L/2] with per-configuration
/// k2 estimates: k_hat(bin) = pairs(bin) / (|torus| * |shell|). Both (x, y)
/// and (y, x) are counted.
class PairHistogram {
 public:
  PairHistogram(int dimension, double length, double rho, int bins = 64)
      : dim_(dimension), L_(length), rho_(rho) {
    if (dimension != 1 && dimension != 2) throw std::invalid_argument("dimension: must be 1 or 2");
    if (!(length > 0.0)) throw std::invalid_argument("torus_length: must be positive");
    if (bins < 1) throw std::invalid_argument("bins: must be positive");
    for (int i = 0; i <= bins; ++i) edges_.push_back(0.5 * length * i / bins);
    counts_.assign(bins, 0.0);
    khat_.assign(bins, {});
    projected_.assign(bins, {});
    scratch_.assign(bins, 0.0);
  }

  int dimension() const { return dim_; }
  double length() const { return L_; }
  double volume() const { return std::pow(L_, dim_); }
  double rho() const { return rho_; }
  std::size_t bins() const { return counts_.size(); }
  std::size_t configurations() const { return configs_; }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& counts() const { return counts_; }
  const RunningStats& population() const { return population_; }

  double shell_volume(std::size_t i) const {
    const double a = edges_[i], b = edges_[i + 1];
    return dim_ == 1 ? 2.0 * (b - a) : std::numbers::pi * (b * b - a * a);
  }

  std::vector<double> centers() const {
    std::vector<double> c;
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i) c.push_back(0.5 * (edges_[i] + edges_[i + 1]));
    return c;
  }

  void add(const Configuration& c) {
    if (c.dimension != dim_ || std::abs(c.length - L_) > 1e-12 * L_) {
      throw std::invalid_argument("pair histogram: configuration geometry mismatch");
    }
    std::fill(scratch_.begin(), scratch_.end(), 0.0);
    const double width = edges_[1] - edges_[0];
    const double rmax = edges_.back();
    const std::size_t nb = counts_.size();
    const auto& pts = c.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const double r = torus_distance(pts[i], pts[j], dim_, L_);
        if (r > rmax) continue;
        const std::size_t b = std::min(nb - 1, static_cast<std::size_t>(r / width));
        scratch_[b] += 2.0;
      }
    }
    const double n = static_cast<double>(pts.size());
    const double vol = volume();
    // torus mean of k2 for this configuration, N(N-1)/|torus|^2
    const double mean_k = n * (n - 1.0) / (vol * vol);
    for (std::size_t b = 0; b < nb; ++b) {
      counts_[b] += scratch_[b];
      const double k = scratch_[b] / (vol * shell_volume(b));
      khat_[b].add(k);
      projected_[b].add(k - mean_k + rho_ * rho_);
    }
    population_.add(n);
    ordered_pairs_.add(n * (n - 1.0));
    ++configs_;
  }

  std::vector<double> k_hat() const { return pick(khat_, false); }
  std::vector<double> standard_error() const { return pick(khat_, true); }

  /// Estimates with each configuration's constant Fourier mode replaced by
  /// rho^2, comparable to torus fields without their zero mode.
  std::vector<double> projected_k_hat() const { return pick(projected_, false); }
  std::vector<double> projected_standard_error() const { return pick(projected_, true); }

  /// Mean ordered-pair count per configuration over all distances.
  double mean_ordered_pairs() const { return ordered_pairs_.mean; }

 private:
  static std::vector<double> pick(const std::vector<RunningStats>& v, bool se) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(se ? s.se() : s.mean);
    return out;
  }

  int dim_;
  double L_;
  double rho_;
  std::vector<double> edges_;
  std::vector<double> counts_;
  std::vector<RunningStats> khat_;
  std::vector<RunningStats> projected_;
  std::vector<double> scratch_;
  RunningStats population_;
  RunningStats ordered_pairs_;
  std::size_t configs_ = 0;
};

inline PairHistogram estimate_pair_correlation(const std::vector<Configuration>& snapshots,
                                               double rho, int bins = 64) {
  if (snapshots.empty()) throw std::invalid_argument("estimate_pair_correlation: empty ensemble");
  PairHistogram h(snapshots.front().dimension, snapshots.front().length, rho, bins);
  for (const auto& c : snapshots) h.add(c);
  return h;
}

struct BinAgreement {
  std::size_t within = 0;
  std::size_t total = 0;
  double max_abs_z = 0.0;
  double fraction() const { return total ? static_cast<double>(within) / total : 0.0; }
};

/// Per-bin z-test of estimates against reference values.
inline BinAgreement compare_bins(const std::vector<double>& est, const std::vector<double>& se,
                                 const std::vector<double>& reference, double nse = 3.0) {
  if (est.size() != reference.size() || se.size() != est.size()) {
    throw std::invalid_argument("compare_bins: mismatched grids");
  }
  BinAgreement a;
  a.total = est.size();
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double diff = std::abs(est[i] - reference[i]);
    const double z = se[i] > 0.0 ? diff / se[i] : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    a.max_abs_z = std::max(a.max_abs_z, z);
    if (z <= nse) ++a.within;
  }
  return a;
}

struct DensityStats {
  std::vector<double> window_sides;
  std::vector<double> volumes;
  std::vector<double> mean;          // mean of N(V)/|V|
  std::vector<double> variance;      // E (N(V)/|V| - rho)^2
  std::vector<double> variance_se;   // across configurations
  std::vector<double> predicted;     // spectral prediction (empty if not supplied)

  bool decreasing() const {
    for (std::size_t i = 1; i < variance.size(); ++i) {
      if (!(variance[i] < variance[i - 1])) return false;
    }
    return true;
  }
};

/// Variance of window densities over nested box windows of the given sides,
/// each tiling the torus. Sides must divide L.
inline DensityStats lln_check(const std::vector<Configuration>& configs, double rho,
                              const std::vector<double>& sides) {
  DensityStats s;
  if (configs.empty()) throw std::invalid_argument("lln_check: empty ensemble");
  const int d = configs.front().dimension;
  const double L = configs.front().length;
  for (double side : sides) {
    if (!(side > 0.0) || side > L * (1.0 + 1e-12)) {
      throw std::invalid_argument("lln_check: window exceeds torus");
    }
    const double tiles = L / side;
    if (std::abs(tiles - std::round(tiles)) > 1e-9) {
      throw std::invalid_argument("lln_check: window side must divide torus length");
    }
    const long per_axis = std::lround(tiles);
    const double vol = std::pow(side, d);
    RunningStats var, mean;
    std::vector<double> counts(static_cast<std::size_t>(d == 1 ? per_axis : per_axis * per_axis));
    for (const auto& c : configs) {
      std::fill(counts.begin(), counts.end(), 0.0);
      for (const auto& p : c.points) {
        const long i = std::min(per_axis - 1, static_cast<long>(p[0] / side));
        const long j = d == 2 ? std::min(per_axis - 1, static_cast<long>(p[1] / side)) : 0;
        counts[static_cast<std::size_t>(i * (d == 2 ? per_axis : 1) + j)] += 1.0;
      }
      double acc = 0.0, m = 0.0;
      for (double n : counts) {
        const double dens = n / vol;
        acc += (dens - rho) * (dens - rho);
        m += dens;
      }
      var.add(acc / counts.size());
      mean.add(m / counts.size());
    }
    s.window_sides.push_back(side);
    s.volumes.push_back(vol);
    s.mean.push_back(mean.mean);
    s.variance.push_back(var.mean);
    s.variance_se.push_back(var.se());
  }
  return s;
}

/// Var(N(V)/|V|) = rho/|V| + |V|^-2 int_V int_V (k_t(x - y) - rho^2) dx dy for a
/// box window of the given side on the torus, from the Fourier series of k_t.
/// Without a time the stationary torus field (zero mode dropped) is used.
inline double predicted_window_variance(const SpectralModel& model, double rho,
                                        std::optional<double> t, double L, double side) {
  if (rho == 0.0) return 0.0;
  const int d = model.dimension();
  const double vol = std::pow(side, d);
  const double dq = 2.0 * std::numbers::pi / L;
  const long mmax = static_cast<long>(std::floor(model.cutoff() / dq));
  auto g = [&](double q) { return t ? model.time_symbol(q, *t) : model.stationary_symbol(q); };
  auto chi = [&](long m) {
    if (m == 0) return side;
    const double q = dq * m;
    return std::sin(0.5 * q * side) / (0.5 * q);
  };
  double s = t ? model.time_symbol(0.0, *t) * vol * vol : 0.0;
  if (d == 1) {
    for (long m = 1; m <= mmax; ++m) {
      const double c = chi(m);
      s += 2.0 * g(dq * m) * c * c;
    }
  } else {
    for (long m1 = -mmax; m1 <= mmax; ++m1) {
      const double c1 = chi(m1);
      for (long m2 = -mmax; m2 <= mmax; ++m2) {
        if ((m1 == 0 && m2 == 0) || m1 * m1 + m2 * m2 > mmax * mmax) continue;
        const double c2 = chi(m2);
        const double q = dq * std::hypot(static_cast<double>(m1), static_cast<double>(m2));
        s += g(q) * c1 * c1 * c2 * c2;
      }
    }
  }
  return rho / vol + rho * s / (std::pow(L, d) * vol * vol);
}

struct ConvergencePoint {
  double time = 0.0;
  double deviation = 0.0;  // max over bins |k_hat - reference|
  double se = 0.0;         // standard error at the maximizing bin
  std::size_t bin = 0;
};

struct ConvergenceCurve {
  std::vector<ConvergencePoint> points;

  /// Each deviation below the previous one by more than the combined SE.
  bool strictly_decreasing() const {
    for (std::size_t i = 1; i < points.size(); ++i) {
      const double gap = points[i - 1].deviation - points[i].deviation;
      if (!(gap > std::hypot(points[i - 1].se, points[i].se))) return false;
    }
    return true;
  }
};

/// Sup deviation of estimated k2 from a reference (typically the bin-averaged
/// stationary torus field) at each snapshot time. With `projected`, both
/// sides have their constant Fourier mode removed.
inline ConvergenceCurve convergence_curve(const std::vector<std::pair<double, const PairHistogram*>>& ensembles,
                                          const std::vector<double>& reference, bool projected = true) {
  ConvergenceCurve c;
  for (std::size_t i = 1; i < ensembles.size(); ++i) {
    if (!(ensembles[i].first > ensembles[i - 1].first)) {
      throw std::invalid_argument("convergence_curve: times must increase");
    }
  }
  for (const auto& [t, h] : ensembles) {
    const auto est = projected ? h->projected_k_hat() : h->k_hat();
    const auto se = projected ? h->projected_standard_error() : h->standard_error();
    if (est.size() != reference.size()) throw std::invalid_argument("convergence_curve: mismatched bins");
    ConvergencePoint p;
    p.time = t;
    for (std::size_t b = 0; b < est.size(); ++b) {
      const double dev = std::abs(est[b] - reference[b]);
      if (dev > p.deviation || b == 0) {
        p.deviation = dev;
        p.se = se[b];
        p.bin = b;
      }
    }
    c.points.push_back(p);
  }
  return c;
}

}  // namespace contact
