#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "contact/kernel.hpp"
#include "contact/stats.hpp"

namespace contact {

/// Finite configuration on the torus [0, L)^d.
struct Configuration {
  int dimension = 1;
  double length = 1.0;
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  double volume() const { return std::pow(length, dimension); }
};

inline double wrap(double x, double L) {
  double y = std::fmod(x, L);
  if (y < 0.0) y += L;
  if (y >= L) y = 0.0;
  return y;
}

struct SimParams {
  double lambda_b = 1.0;
  double lambda_d = 1.0;
  DispersalKernel kernel = DispersalKernel::symmetric_stable(1, 0.5);
  std::optional<JumpKernel> jump;
  double horizon = 1.0;
  std::vector<double> snapshot_times;
  std::size_t n_max = 1'000'000;
  bool record_trace = false;          // population after every event
  bool record_waits = false;          // rate-rescaled waiting times
  bool record_displacements = false;  // birth displacements

  void check() const {
    if (!(lambda_b >= 0.0) || !(lambda_d >= 0.0)) {
      throw std::invalid_argument("lambda_b, lambda_d: must be non-negative");
    }
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon: must be non-negative");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
      if (snapshot_times[i] < 0.0 || snapshot_times[i] > horizon) {
        throw std::invalid_argument("snapshot_times: must lie in [0, horizon]");
      }
      if (i > 0 && !(snapshot_times[i] > snapshot_times[i - 1])) {
        throw std::invalid_argument("snapshot_times: must be strictly increasing");
      }
    }
    if (jump && jump->shape.dimension() != kernel.dimension()) {
      throw std::invalid_argument("jump.dimension: must match kernel dimension");
    }
  }

  double rate_per_particle() const {
    return lambda_b + lambda_d + (jump ? jump->mass : 0.0);
  }
};

enum class EventTag { Birth, Death, Jump };

struct StepResult {
  double wait = 0.0;
  EventTag tag = EventTag::Death;
  Point displacement{0.0, 0.0};
};

namespace detail {

template <class Rng>
Point finite_sample(const DispersalKernel& k, Rng& rng) {
  for (;;) {
    Point p = k.sample(rng);
    if (std::isfinite(p[0]) && std::isfinite(p[1])) return p;
  }
}

}  // namespace detail

/// Applies one event (death, birth or jump of a uniformly chosen particle)
/// with probabilities proportional to the per-particle rates.
template <class Rng>
StepResult apply_event(Configuration& config, const SimParams& params, Rng& rng) {
  const std::size_t n = config.points.size();
  const double per = params.rate_per_particle();
  StepResult res;
  std::uniform_real_distribution<double> u(0.0, per);
  const double pick = u(rng);
  std::uniform_int_distribution<std::size_t> who(0, n - 1);
  const std::size_t i = who(rng);
  const double L = config.length;
  if (pick < params.lambda_d) {
    res.tag = EventTag::Death;
    config.points[i] = config.points.back();
    config.points.pop_back();
  } else if (pick < params.lambda_d + params.lambda_b) {
    res.tag = EventTag::Birth;
    res.displacement = detail::finite_sample(params.kernel, rng);
    Point child = config.points[i];
    child[0] = wrap(child[0] + res.displacement[0], L);
    if (config.dimension == 2) child[1] = wrap(child[1] + res.displacement[1], L);
    config.points.push_back(child);
  } else {
    res.tag = EventTag::Jump;
    res.displacement = detail::finite_sample(params.jump->shape, rng);
    Point& p = config.points[i];
    p[0] = wrap(p[0] + res.displacement[0], L);
    if (config.dimension == 2) p[1] = wrap(p[1] + res.displacement[1], L);
  }
  return res;
}

template <class Rng>
double draw_wait(const Configuration& config, const SimParams& params, Rng& rng) {
  std::exponential_distribution<double> wait(params.rate_per_particle() *
                                             static_cast<double>(config.size()));
  return wait(rng);
}

/// One transition of the jump chain, applied in place. The waiting time is
/// exponential with rate (lambda_b + lambda_d + jump mass) |gamma|.
template <class Rng>
StepResult step(Configuration& config, const SimParams& params, Rng& rng) {
  if (config.points.empty()) throw std::logic_error("step: empty configuration is absorbing");
  if (!(params.rate_per_particle() > 0.0)) throw std::logic_error("step: all rates are zero");
  const double w = draw_wait(config, params, rng);
  StepResult res = apply_event(config, params, rng);
  res.wait = w;
  return res;
}

struct Snapshot {
  double time = 0.0;
  Configuration config;
};

struct SimulationRun {
  std::uint64_t seed = 0;
  std::uint64_t events = 0, births = 0, deaths = 0, jumps = 0;
  std::optional<double> extinction_time;
  bool truncated = false;
  std::size_t initial_size = 0;
  std::vector<Snapshot> snapshots;
  std::vector<std::pair<double, std::size_t>> trace;
  std::vector<double> rescaled_waits;
  std::vector<Point> displacements;
};

/// Simulates to the horizon, extinction, or the population cap; deterministic
/// given the seed.
inline SimulationRun run(Configuration config, const SimParams& params, std::uint64_t seed) {
  params.check();
  if (config.dimension != params.kernel.dimension()) {
    throw std::invalid_argument("initial configuration dimension does not match kernel");
  }
  SimulationRun out;
  out.seed = seed;
  out.initial_size = config.size();
  std::mt19937_64 rng(seed);
  double t = 0.0;
  std::size_t next_snap = 0;
  const auto& snaps = params.snapshot_times;
  auto flush_snapshots = [&](double until) {
    while (next_snap < snaps.size() && snaps[next_snap] <= until) {
      out.snapshots.push_back({snaps[next_snap], config});
      ++next_snap;
    }
  };
  if (params.record_trace) out.trace.emplace_back(0.0, config.size());
  if (config.size() == 0) out.extinction_time = 0.0;
  while (!config.points.empty()) {
    if (config.size() >= params.n_max) {
      out.truncated = true;
      break;
    }
    const double rate = params.rate_per_particle() * static_cast<double>(config.size());
    if (!(rate > 0.0)) break;
    const double w = draw_wait(config, params, rng);
    if (t + w > params.horizon) break;
    // snapshots strictly before the event see the pre-event state
    flush_snapshots(std::nextafter(t + w, -1.0));
    StepResult ev = apply_event(config, params, rng);
    ev.wait = w;
    t += ev.wait;
    ++out.events;
    switch (ev.tag) {
      case EventTag::Birth:
        ++out.births;
        if (params.record_displacements) out.displacements.push_back(ev.displacement);
        break;
      case EventTag::Death: ++out.deaths; break;
      case EventTag::Jump: ++out.jumps; break;
    }
    if (params.record_waits) out.rescaled_waits.push_back(ev.wait * rate);
    if (params.record_trace) out.trace.emplace_back(t, config.size());
    if (config.points.empty()) out.extinction_time = t;
  }
  // after extinction or truncation the state is frozen
  flush_snapshots(params.horizon);
  return out;
}

/// Poisson point process of intensity rho on the torus.
template <class Rng>
Configuration poisson_configuration(int dim, double L, double rho, Rng& rng) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension: must be 1 or 2");
  if (!(L > 0.0)) throw std::invalid_argument("torus_length: must be positive");
  if (!(rho >= 0.0)) throw std::invalid_argument("rho: must be non-negative");
  Configuration c{dim, L, {}};
  const double mean = rho * std::pow(L, dim);
  if (mean == 0.0) return c;
  std::poisson_distribution<long> count(mean);
  const long n = count(rng);
  std::uniform_real_distribution<double> u(0.0, L);
  c.points.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double x = u(rng);
    const double y = dim == 2 ? u(rng) : 0.0;
    c.points.push_back({x, y});
  }
  return c;
}

struct EnsembleSpec {
  int dimension = 1;
  double length = 200.0;
  double rho = 1.0;
  std::uint64_t master_seed = 1;
  std::size_t count = 1;
};

/// Per-run seeds derive from (master seed, run index); the initial Poisson
/// configuration is drawn from its own stream so runs are independent of
/// evaluation order. `visit(index, run)` sees each run once, in index order.
template <class Visitor>
void run_ensemble(const EnsembleSpec& spec, const SimParams& params, Visitor&& visit) {
  params.check();
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::uint64_t seed = derive_seed(spec.master_seed, i);
    std::mt19937_64 init_rng(splitmix64(seed ^ 0xa0761d6478bd642fULL));
    Configuration c = poisson_configuration(spec.dimension, spec.length, spec.rho, init_rng);
    SimulationRun r = run(std::move(c), params, seed);
    visit(i, r);
  }
}

struct Ensemble {
  std::uint64_t master_seed = 0;
  std::vector<SimulationRun> runs;
  std::size_t truncated = 0;
};

inline Ensemble run_ensemble(const EnsembleSpec& spec, const SimParams& params) {
  Ensemble e;
  e.master_seed = spec.master_seed;
  e.runs.reserve(spec.count);
  run_ensemble(spec, params, [&](std::size_t, SimulationRun& r) {
    if (r.truncated) ++e.truncated;
    e.runs.push_back(std::move(r));
  });
  return e;
}

}  // namespace contact
