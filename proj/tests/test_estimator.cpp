#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "contact/estimator.hpp"
#include "contact/simulator.hpp"
#include "contact/stats.hpp"

using namespace contact;
using Catch::Approx;

namespace {

std::vector<Configuration> poisson_ensemble(int dim, double L, double rho, std::size_t count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<Configuration> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(poisson_configuration(dim, L, rho, rng));
  return out;
}

}  // namespace

TEST_CASE("minimum-image torus distance", "[estimator]") {
  CHECK(torus_distance({1.0, 0.0}, {9.0, 0.0}, 1, 10.0) == Approx(2.0));
  CHECK(torus_distance({0.5, 0.5}, {9.5, 9.5}, 2, 10.0) == Approx(std::sqrt(2.0)));
  CHECK(torus_distance({2.0, 3.0}, {2.0, 3.0}, 2, 10.0) == 0.0);
}

TEST_CASE("two points give one ordered pair each way", "[estimator]") {
  PairHistogram h(1, 100.0, 1.0, 64);
  h.add(Configuration{1, 100.0, {{10.0, 0.0}, {17.3, 0.0}}});
  const double width = 50.0 / 64;
  const std::size_t bin = static_cast<std::size_t>(7.3 / width);
  for (std::size_t b = 0; b < h.bins(); ++b) CHECK(h.counts()[b] == (b == bin ? 2.0 : 0.0));
}

TEST_CASE("poisson input: k2 = rho^2 per bin", "[estimator]") {
  for (int d : {1, 2}) {
    const double L = d == 1 ? 100.0 : 20.0;
    const auto configs = poisson_ensemble(d, L, 1.5, 2000, 10 + d);
    const auto h = estimate_pair_correlation(configs, 1.5, 32);
    const auto k = h.k_hat(), se = h.standard_error();
    const auto agree = compare_bins(k, se, std::vector<double>(k.size(), 2.25), 3.0);
    INFO("d=" << d << " max |z| " << agree.max_abs_z);
    CHECK(agree.within == agree.total);
    CHECK(h.population().mean == Approx(1.5 * std::pow(L, d)).margin(4.0 * h.population().se()));
    for (double v : k) CHECK(v >= 0.0);
  }
}

TEST_CASE("estimator z-scores on poisson input are centred", "[estimator][property]") {
  // bins of one ensemble share the population fluctuation, so take one bin
  // from each of 400 independent ensembles
  RunningStats z;
  for (unsigned rep = 0; rep < 400; ++rep) {
    const auto h = estimate_pair_correlation(poisson_ensemble(1, 32.0, 1.0, 100, 100 + rep), 1.0, 16);
    const std::size_t b = rep % 16;
    z.add((h.k_hat()[b] - 1.0) / h.standard_error()[b]);
  }
  CHECK(std::abs(z.mean) < 0.1);
  CHECK(z.variance() == Approx(1.0).margin(0.2));
}

TEST_CASE("shell normalization reproduces the ordered-pair count", "[estimator][property]") {
  const auto configs = poisson_ensemble(1, 40.0, 2.0, 50, 5);
  const auto h = estimate_pair_correlation(configs, 2.0, 16);
  const auto k = h.k_hat();
  double s = 0.0;
  for (std::size_t b = 0; b < k.size(); ++b) s += k[b] * h.volume() * h.shell_volume(b);
  CHECK(s == Approx(h.mean_ordered_pairs()).epsilon(1e-12));
}

TEST_CASE("projected estimate removes each configuration's mean", "[estimator]") {
  const auto configs = poisson_ensemble(1, 40.0, 2.0, 200, 6);
  const auto h = estimate_pair_correlation(configs, 2.0, 16);
  const auto p = h.projected_k_hat();
  double s = 0.0, v = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) {
    s += (p[b] - 4.0) * h.shell_volume(b);
    v += h.shell_volume(b);
  }
  CHECK(std::abs(s / v) < 1e-12);
}

TEST_CASE("estimator errors", "[estimator]") {
  CHECK_THROWS_AS(estimate_pair_correlation({}, 1.0), std::invalid_argument);
  PairHistogram h(1, 10.0, 1.0, 8);
  CHECK_THROWS_AS(h.add(Configuration{1, 12.0, {}}), std::invalid_argument);
  CHECK_THROWS_AS(compare_bins({1.0}, {0.1, 0.1}, {1.0}), std::invalid_argument);
}

TEST_CASE("window variance of poisson input is rho/|V|", "[estimator]") {
  const double L = 64.0;
  const auto configs = poisson_ensemble(1, L, 1.0, 500, 21);
  const std::vector<double> sides{2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  auto s = lln_check(configs, 1.0, sides);
  CHECK(s.decreasing());
  const SpectralModel m(DispersalKernel::symmetric_stable(1, 0.5));
  for (std::size_t i = 0; i < sides.size(); ++i) {
    CHECK(s.variance[i] >= 0.0);
    CHECK(std::abs(s.variance[i] - 1.0 / sides[i]) < 3.0 * s.variance_se[i]);
    // at t = 0 the spectral prediction is the Poisson one
    CHECK(predicted_window_variance(m, 1.0, 0.0, L, sides[i]) == Approx(1.0 / sides[i]).epsilon(1e-12));
  }
  const auto zero = lln_check(poisson_ensemble(1, L, 0.0, 10, 1), 0.0, sides);
  for (std::size_t i = 0; i < sides.size(); ++i) {
    CHECK(zero.mean[i] == 0.0);
    CHECK(zero.variance[i] == 0.0);
  }
  CHECK(predicted_window_variance(m, 0.0, 5.0, L, 8.0) == 0.0);
  CHECK_THROWS_AS(lln_check(configs, 1.0, {128.0}), std::invalid_argument);
  CHECK_THROWS_AS(lln_check(configs, 1.0, {5.0}), std::invalid_argument);
}

TEST_CASE("2-D windows tile the torus", "[estimator]") {
  const auto configs = poisson_ensemble(2, 16.0, 1.0, 400, 31);
  const auto s = lln_check(configs, 1.0, {2.0, 4.0, 8.0, 16.0});
  for (std::size_t i = 0; i < s.volumes.size(); ++i) {
    CHECK(std::abs(s.variance[i] - 1.0 / s.volumes[i]) < 3.0 * s.variance_se[i]);
  }
}

TEST_CASE("convergence curve logic", "[estimator]") {
  ConvergenceCurve c;
  c.points = {{0.0, 1.0, 0.01, 0}, {1.0, 0.5, 0.01, 0}, {2.0, 0.2, 0.01, 0}};
  CHECK(c.strictly_decreasing());
  c.points.push_back({3.0, 0.19, 0.01, 0});
  CHECK_FALSE(c.strictly_decreasing());

  const auto configs = poisson_ensemble(1, 50.0, 1.0, 300, 41);
  const auto h = estimate_pair_correlation(configs, 1.0, 16);
  const std::vector<double> ref(16, 1.0);
  CHECK_THROWS_AS(convergence_curve({{2.0, &h}, {1.0, &h}}, ref), std::invalid_argument);
  CHECK_THROWS_AS(convergence_curve({{1.0, &h}}, std::vector<double>(8, 1.0)), std::invalid_argument);
}

TEST_CASE("t = 0 deviation from the stationary field is its sup excess", "[estimator]") {
  const double L = 50.0;
  const SpectralModel m(DispersalKernel::symmetric_stable(1, 0.5));
  const auto h = estimate_pair_correlation(poisson_ensemble(1, L, 1.0, 2000, 51), 1.0, 32);
  const auto ref = m.torus_bin_average(1.0, std::nullopt, h.edges(), {L, 0.0, false});
  double sup = 0.0;
  for (double v : ref) sup = std::max(sup, std::abs(v - 1.0));
  const auto curve = convergence_curve({{0.0, &h}}, ref);
  CHECK(std::abs(curve.points[0].deviation - sup) < 3.0 * curve.points[0].se);
}

TEST_CASE("critical ensemble at t = 5 matches the spectral torus field", "[estimator][oracle]") {
  const double L = 50.0;
  SimParams p;
  p.kernel = DispersalKernel::symmetric_stable(1, 0.5);
  p.horizon = 5.0;
  p.snapshot_times = {5.0};
  std::vector<Configuration> snaps;
  run_ensemble(EnsembleSpec{1, L, 1.0, 61, 3000}, p,
               [&](std::size_t, SimulationRun& r) { snaps.push_back(std::move(r.snapshots[0].config)); });
  const auto h = estimate_pair_correlation(snaps, 1.0, 32);
  const SpectralModel m(p.kernel);
  const auto ref = m.torus_bin_average(1.0, 5.0, h.edges(), {L});
  const auto agree = compare_bins(h.k_hat(), h.standard_error(), ref);
  INFO("max |z| " << agree.max_abs_z);
  CHECK(agree.fraction() >= 0.95);
}
