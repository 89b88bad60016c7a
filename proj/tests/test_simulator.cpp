#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "contact/simulator.hpp"
#include "contact/stats.hpp"

using namespace contact;
using Catch::Approx;

namespace {

Configuration line_of(std::size_t n, double L) {
  Configuration c{1, L, {}};
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({L * (i + 0.5) / n, 0.0});
  return c;
}

SimParams critical(double horizon, std::vector<double> snaps = {}) {
  SimParams p;
  p.kernel = DispersalKernel::symmetric_stable(1, 0.5);
  p.horizon = horizon;
  p.snapshot_times = std::move(snaps);
  return p;
}

}  // namespace

TEST_CASE("wrap maps onto [0, L)", "[simulator]") {
  CHECK(wrap(-0.25, 10.0) == Approx(9.75));
  CHECK(wrap(10.0, 10.0) == 0.0);
  CHECK(wrap(123.5, 10.0) == Approx(3.5));
  const double y = wrap(-1e-18, 10.0);
  CHECK(y >= 0.0);
  CHECK(y < 10.0);
}

TEST_CASE("kolmogorov tail at textbook critical values", "[stats]") {
  CHECK(kolmogorov_tail(1.3581) == Approx(0.05).margin(1e-3));
  CHECK(kolmogorov_tail(1.6276) == Approx(0.01).margin(1e-3));
}

TEST_CASE("seed derivation is deterministic and spreads indices", "[stats]") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("mean waiting time at |gamma| = 5 is 1/10", "[simulator]") {
  const auto params = critical(1.0);
  std::mt19937_64 rng(2024);
  RunningStats w;
  for (int i = 0; i < 100000; ++i) {
    Configuration c = line_of(5, 20.0);
    w.add(step(c, params, rng).wait);
  }
  CHECK(std::abs(w.mean - 0.1) < 4.0 * w.se());
}

TEST_CASE("single steps: death on a singleton, empty configuration", "[simulator]") {
  SimParams p = critical(1.0);
  p.lambda_b = 0.0;
  std::mt19937_64 rng(1);
  Configuration c = line_of(1, 10.0);
  const auto ev = step(c, p, rng);
  CHECK(ev.tag == EventTag::Death);
  CHECK(c.size() == 0);
  CHECK_THROWS_AS(step(c, p, rng), std::logic_error);

  const auto r = run(Configuration{1, 10.0, {}}, critical(5.0, {0.0, 5.0}), 3);
  CHECK(r.events == 0);
  REQUIRE(r.extinction_time.has_value());
  CHECK(*r.extinction_time == 0.0);
  REQUIRE(r.snapshots.size() == 2);
  for (const auto& s : r.snapshots) CHECK(s.config.size() == 0);
}

TEST_CASE("population trace moves by one per birth or death", "[simulator][property]") {
  SimParams p = critical(30.0);
  p.record_trace = true;
  p.jump = JumpKernel(DispersalKernel::gaussian(1), 0.5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = run(line_of(10, 50.0), p, seed);
    CHECK(r.events == r.births + r.deaths + r.jumps);
    REQUIRE(r.trace.size() == r.events + 1);
    long changes = 0;
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      CHECK(r.trace[i].first > r.trace[i - 1].first);
      const long dn = static_cast<long>(r.trace[i].second) - static_cast<long>(r.trace[i - 1].second);
      CHECK(std::abs(dn) <= 1);
      if (dn != 0) ++changes;
    }
    CHECK(changes == static_cast<long>(r.births + r.deaths));
    if (r.extinction_time) {
      // absorbing: nothing happens after extinction
      CHECK(r.trace.back().second == 0);
      CHECK(r.trace.back().first == *r.extinction_time);
    }
  }
}

TEST_CASE("coordinates stay on the torus", "[simulator][property]") {
  SimParams p = critical(5.0, {5.0});
  p.kernel = DispersalKernel::symmetric_stable(2, 0.3);
  Configuration c{2, 10.0, {{1.0, 1.0}, {9.0, 9.0}, {5.0, 0.1}}};
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto r = run(c, p, seed);
    for (const auto& pt : r.snapshots.back().config.points) {
      CHECK(pt[0] >= 0.0);
      CHECK(pt[0] < 10.0);
      CHECK(pt[1] >= 0.0);
      CHECK(pt[1] < 10.0);
    }
  }
}

TEST_CASE("runs are deterministic given the seed", "[simulator]") {
  const auto p = critical(10.0, {2.0, 10.0});
  const auto a = run(line_of(20, 40.0), p, 77), b = run(line_of(20, 40.0), p, 77);
  CHECK(a.events == b.events);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) CHECK(a.snapshots[i].config.points == b.snapshots[i].config.points);
  const auto c = run(line_of(20, 40.0), p, 78);
  CHECK(c.snapshots.back().config.points != a.snapshots.back().config.points);
}

TEST_CASE("ensembles with the same master seed are identical", "[simulator]") {
  const EnsembleSpec spec{1, 30.0, 1.0, 4242, 25};
  const auto p = critical(3.0, {0.0, 3.0});
  const auto a = run_ensemble(spec, p), b = run_ensemble(spec, p);
  REQUIRE(a.runs.size() == 25);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].seed == b.runs[i].seed);
    CHECK(a.runs[i].events == b.runs[i].events);
    CHECK(a.runs[i].snapshots.back().config.points == b.runs[i].snapshots.back().config.points);
  }
}

TEST_CASE("rate-rescaled waiting times are unit exponential (KS at 1%)", "[simulator][property]") {
  SimParams p = critical(20.0);
  p.record_waits = true;
  std::vector<double> pooled;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto r = run(line_of(30, 60.0), p, seed);
    pooled.insert(pooled.end(), r.rescaled_waits.begin(), r.rescaled_waits.end());
  }
  REQUIRE(pooled.size() > 10000);
  const auto ks = ks_exponential(pooled);
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("birth displacements follow the kernel", "[simulator][property]") {
  SimParams p = critical(20.0);
  p.record_displacements = true;
  std::vector<Point> xs;
  for (std::uint64_t seed = 1; seed <= 40 && xs.size() < 50000; ++seed) {
    const auto r = run(line_of(50, 100.0), p, seed);
    xs.insert(xs.end(), r.displacements.begin(), r.displacements.end());
  }
  REQUIRE(xs.size() > 20000);
  for (double q : {0.25, 1.0, 3.0}) {
    RunningStats s;
    for (const auto& x : xs) s.add(std::cos(q * x[0]));
    CHECK(std::abs(s.mean - p.kernel.hat(q)) < 4.0 * s.se());
  }
}

TEST_CASE("critical mean population is conserved", "[simulator]") {
  const EnsembleSpec spec{1, 20.0, 1.0, 99, 10000};
  const auto p = critical(5.0, {0.0, 5.0});
  RunningStats n0, n5;
  run_ensemble(spec, p, [&](std::size_t, SimulationRun& r) {
    n0.add(r.snapshots[0].config.size());
    n5.add(r.snapshots[1].config.size());
  });
  CHECK(std::abs(n0.mean - 20.0) < 4.0 * n0.se());
  CHECK(std::abs(n5.mean - 20.0) < 4.0 * n5.se());
}

TEST_CASE("supercritical mean grows like exp((lambda_b - lambda_d) t)", "[simulator]") {
  const EnsembleSpec spec{1, 20.0, 1.0, 100, 10000};
  SimParams p = critical(5.0, {5.0});
  p.lambda_b = 1.2;
  RunningStats n5;
  run_ensemble(spec, p, [&](std::size_t, SimulationRun& r) { n5.add(r.snapshots[0].config.size()); });
  CHECK(std::abs(n5.mean - 20.0 * std::exp(1.0)) < 4.0 * n5.se());
}

TEST_CASE("population cap flags truncation", "[simulator]") {
  SimParams p = critical(50.0, {50.0});
  p.lambda_d = 0.0;
  p.n_max = 100;
  const auto r = run(line_of(10, 10.0), p, 5);
  CHECK(r.truncated);
  CHECK(r.snapshots.back().config.size() == 100);

  const EnsembleSpec spec{1, 10.0, 1.0, 7, 5};
  const auto e = run_ensemble(spec, p);
  CHECK(e.truncated == 5);
}

TEST_CASE("invalid parameters are rejected", "[simulator]") {
  SimParams p = critical(1.0, {0.5, 0.2});
  CHECK_THROWS_AS(run(line_of(3, 5.0), p, 1), std::invalid_argument);
  p = critical(1.0, {2.0});
  CHECK_THROWS_AS(run(line_of(3, 5.0), p, 1), std::invalid_argument);
  p = critical(1.0);
  p.lambda_b = -1.0;
  CHECK_THROWS_AS(run(line_of(3, 5.0), p, 1), std::invalid_argument);
  CHECK_THROWS_AS(run(Configuration{2, 5.0, {}}, critical(1.0), 1), std::invalid_argument);
}
