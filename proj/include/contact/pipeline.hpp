#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "contact/compare.hpp"
#include "contact/config.hpp"
#include "contact/estimator.hpp"
#include "contact/hierarchy.hpp"
#include "contact/io.hpp"
#include "contact/kernel.hpp"
#include "contact/simulator.hpp"
#include "contact/spectral.hpp"

namespace contact {

namespace fs = std::filesystem;

/// Error raised inside a pipeline stage; the message names the stage.
struct StageError : std::runtime_error {
  std::string stage;
  StageError(std::string s, const std::string& what)
      : std::runtime_error("stage " + s + ": " + what), stage(std::move(s)) {}
};

template <class F>
auto run_stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

inline Provenance provenance(const ExperimentConfig& c) { return {config_hash(c), c.master_seed}; }

inline std::optional<JumpKernel> build_jump(const ExperimentConfig& c) {
  if (!c.jump) return std::nullopt;
  return c.jump->build();
}

inline SpectralModel build_model(const ExperimentConfig& c) {
  return SpectralModel(c.kernel.build(), build_jump(c));
}

inline bool expects_finite(const ExperimentConfig& c) {
  return c.kernel.build().heavy_tail() || (c.jump && c.jump->mass > 0.0 && c.jump->shape.build().heavy_tail());
}

inline bool is_critical(const ExperimentConfig& c) { return c.lambda_b == 1.0 && c.lambda_d == 1.0; }

inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline nlohmann::json to_json(const ValidationReport& r) {
  return {{"norm_residual", r.norm_residual},
          {"max_abs_hat", r.max_abs_hat},
          {"tail_slope", json_number(r.tail_slope)},
          {"heavy_tail", r.heavy_tail}};
}

inline nlohmann::json to_json(const Lemma1Report& r) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& [eps, v] : r.cutoff_series) series.push_back({eps, json_number(v)});
  return {{"finite", r.finite},
          {"value", json_number(r.value)},
          {"cutoff_series", series},
          {"small_p_exponent", json_number(r.small_p_exponent)},
          {"c1", json_number(r.c1)}};
}

inline nlohmann::json to_json(const GrowthCurve& g) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [t, k] : g.points) pts.push_back({t, k});
  return {{"points", pts},
          {"exponent", json_number(g.exponent)},
          {"last_exponent", json_number(g.last_exponent)},
          {"classification", g.classification}};
}

inline nlohmann::json to_json(const DensityStats& s) {
  return {{"window_sides", s.window_sides}, {"volumes", s.volumes},       {"mean", s.mean},
          {"variance", s.variance},         {"variance_se", s.variance_se}, {"predicted", s.predicted}};
}

inline std::vector<double> bin_edges(const ExperimentConfig& c) {
  std::vector<double> e;
  for (int i = 0; i <= c.bins; ++i) e.push_back(0.5 * c.torus_length * i / c.bins);
  return e;
}

// ---- validate -------------------------------------------------------------

inline nlohmann::json validate_stage(const ExperimentConfig& c) {
  return run_stage("validate", [&] {
    const auto prov = provenance(c);
    nlohmann::json j;
    j["kernel"] = to_json(validate(c.kernel.build()));
    if (c.jump) j["jump"] = to_json(validate(c.jump->shape.build()));
    write_json(c.output_path() / "validate.json", j, prov);
    return j;
  });
}

// ---- spectral -------------------------------------------------------------

/// Writes spectral.csv (r,t,k2,u2; t = inf for the stationary field),
/// spectral_bins.csv (torus shell averages used by compare), lemma1.json and
/// growth.json.
inline void spectral_stage(const ExperimentConfig& c) {
  run_stage("spectral", [&] {
    const auto prov = provenance(c);
    const auto model = build_model(c);
    const auto lemma = model.lemma1();
    write_json(c.output_path() / "lemma1.json", to_json(lemma), prov);

    std::vector<double> radii;
    for (int i = 0; i < c.radial_points; ++i) radii.push_back(0.5 * c.torus_length * i / (c.radial_points - 1));
    {
      auto out = open_output(c.output_path() / "spectral.csv");
      write_csv_header(out, prov, "r,t,k2,u2");
      auto emit = [&](const SpectralField& f, const std::string& tlabel) {
        for (std::size_t i = 0; i < f.radii.size(); ++i) {
          out << fmt(f.radii[i]) << "," << tlabel << "," << fmt(f.values[i]) << ","
              << fmt(f.values[i] - c.rho * c.rho) << "\n";
        }
      };
      for (double t : c.times) emit(model.at_time(c.rho, t, radii), fmt(t));
      if (lemma.finite) emit(model.stationary(c.rho, radii), "inf");
    }
    {
      const auto edges = bin_edges(c);
      TorusGeometry full{c.torus_length, 0.0, true};
      TorusGeometry proj{c.torus_length, 0.0, false};
      auto out = open_output(c.output_path() / "spectral_bins.csv");
      write_csv_header(out, prov, "t,r,k2,k2_projected");
      auto emit = [&](const std::vector<double>& a, const std::vector<double>& b, const std::string& tl) {
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
          out << tl << "," << fmt(0.5 * (edges[i] + edges[i + 1])) << "," << fmt(a[i]) << "," << fmt(b[i]) << "\n";
        }
      };
      for (double t : c.times) {
        emit(model.torus_bin_average(c.rho, t, edges, full), model.torus_bin_average(c.rho, t, edges, proj), fmt(t));
      }
      if (lemma.finite) {
        const auto s = model.torus_bin_average(c.rho, std::nullopt, edges, full);
        emit(s, s, "inf");
      }
    }
    write_json(c.output_path() / "growth.json", to_json(clustering_growth_curve(model, c.rho, c.growth_times)), prov);
    return 0;
  });
}

// ---- simulate -------------------------------------------------------------

inline SimParams sim_params(const ExperimentConfig& c) {
  SimParams p;
  p.lambda_b = c.lambda_b;
  p.lambda_d = c.lambda_d;
  p.kernel = c.kernel.build();
  p.jump = build_jump(c);
  p.horizon = c.horizon();
  p.snapshot_times = c.times;
  p.n_max = c.n_max;
  return p;
}

struct SimulationOutputs {
  std::map<double, std::vector<Configuration>> snapshots;  // truncated runs excluded
  std::size_t runs = 0;
  std::size_t truncated = 0;
};

/// Writes traces.csv (population at each snapshot time), snapshots.csv (if
/// enabled) and simulate.json; returns snapshots grouped by time.
inline SimulationOutputs simulate_stage(const ExperimentConfig& c) {
  return run_stage("simulate", [&] {
    const auto prov = provenance(c);
    SimulationOutputs out;
    out.runs = c.runs;
    auto traces = open_output(c.output_path() / "traces.csv");
    write_csv_header(traces, prov, "run_id,t,n");
    std::optional<SnapshotWriter> snaps;
    if (c.write_snapshots) snaps.emplace(c.output_path() / "snapshots.csv", c.dimension, prov);
    std::vector<std::size_t> excluded;
    EnsembleSpec spec{c.dimension, c.torus_length, c.rho, c.master_seed, c.runs};
    run_ensemble(spec, sim_params(c), [&](std::size_t id, SimulationRun& r) {
      for (const auto& s : r.snapshots) traces << id << "," << fmt(s.time) << "," << s.config.size() << "\n";
      if (r.truncated) {
        ++out.truncated;
        excluded.push_back(id);
        return;
      }
      for (auto& s : r.snapshots) {
        if (snaps) snaps->write(id, s);
        out.snapshots[s.time].push_back(std::move(s.config));
      }
    });
    nlohmann::json j{{"runs", c.runs}, {"truncated", out.truncated}, {"excluded_run_ids", excluded},
                     {"n_max", c.n_max}};
    write_json(c.output_path() / "simulate.json", j, prov);
    return out;
  });
}

// ---- estimate -------------------------------------------------------------

/// Writes estimate.csv (t,r,k2_hat,se), estimate_projected.csv (same columns,
/// each configuration's constant Fourier mode replaced by rho^2),
/// population.json and density_stats.json (LLN at the last snapshot time).
inline void estimate_stage(const ExperimentConfig& c,
                           const std::map<double, std::vector<Configuration>>& snapshots) {
  run_stage("estimate", [&] {
    const auto prov = provenance(c);
    if (snapshots.empty()) throw std::invalid_argument("no snapshots to estimate from");
    auto est = open_output(c.output_path() / "estimate.csv");
    auto proj = open_output(c.output_path() / "estimate_projected.csv");
    write_csv_header(est, prov, "t,r,k2_hat,se");
    write_csv_header(proj, prov, "t,r,k2_hat,se");
    nlohmann::json pop = nlohmann::json::array();
    for (const auto& [t, configs] : snapshots) {
      const auto h = estimate_pair_correlation(configs, c.rho, c.bins);
      const auto r = h.centers();
      const auto k = h.k_hat(), se = h.standard_error();
      const auto kp = h.projected_k_hat(), sp = h.projected_standard_error();
      for (std::size_t b = 0; b < r.size(); ++b) {
        est << fmt(t) << "," << fmt(r[b]) << "," << fmt(k[b]) << "," << fmt(se[b]) << "\n";
        proj << fmt(t) << "," << fmt(r[b]) << "," << fmt(kp[b]) << "," << fmt(sp[b]) << "\n";
      }
      pop.push_back({{"t", t},
                     {"mean", h.population().mean},
                     {"se", h.population().se()},
                     {"configurations", h.configurations()}});
    }
    write_json(c.output_path() / "population.json", {{"population", pop}}, prov);

    const double t_last = snapshots.rbegin()->first;
    auto stats = lln_check(snapshots.rbegin()->second, c.rho, c.window_sides());
    if (is_critical(c)) {
      const auto model = build_model(c);
      for (double side : stats.window_sides) {
        stats.predicted.push_back(predicted_window_variance(model, c.rho, t_last, c.torus_length, side));
      }
    }
    nlohmann::json j = to_json(stats);
    j["t"] = t_last;
    write_json(c.output_path() / "density_stats.json", j, prov);
    return 0;
  });
}

// ---- compare --------------------------------------------------------------

inline nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return nlohmann::json::parse(in);
}

/// Rows of a (t, r, value, se-or-value) table grouped by t.
inline std::map<double, std::vector<std::vector<double>>> group_by_t(const CsvTable& t) {
  std::map<double, std::vector<std::vector<double>>> g;
  const std::size_t tc = t.column("t");
  for (const auto& row : t.rows) g[row[tc]].push_back(row);
  return g;
}

inline double json_or_nan(const nlohmann::json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

/// Reads the stage outputs from the output directory and evaluates all checks.
inline ComparisonReport compare_stage(const ExperimentConfig& c) {
  return run_stage("compare", [&] {
    const fs::path dir = c.output_path();
    ComparisonReport rep;
    const bool finite_expected = expects_finite(c);

    const auto val = read_json(dir / "validate.json");
    const double resid = val["kernel"]["norm_residual"].get<double>();
    const double ntol = normalization_tolerance(c.dimension);
    rep.add({"kernel_normalization", 0.0, resid, ntol, resid < ntol, true, false, ""});
    const double mh = val["kernel"]["max_abs_hat"].get<double>();
    rep.add({"kernel_max_abs_hat", 1.0, mh, 1.0, mh < 1.0, true, false, "must stay below 1 for p != 0"});

    const auto lemma = read_json(dir / "lemma1.json");
    const bool finite = lemma["finite"].get<bool>();
    rep.add({"lemma1_finite", finite_expected ? 1.0 : 0.0, finite ? 1.0 : 0.0, 0.0, finite == finite_expected, true,
             false, finite ? "small-p integral converges" : "small-p integral diverges"});

    const auto growth = read_json(dir / "growth.json");
    const std::string cls = growth["classification"].get<std::string>();
    const std::string want = finite_expected ? "convergent" : "divergent";
    rep.add({"clustering_" + want, 1.0, cls == want ? 1.0 : 0.0, 0.0, cls == want, true, false,
             "k_t(0) growth exponent " + fmt(json_or_nan(growth["last_exponent"]))});

    const double vol = std::pow(c.torus_length, c.dimension);
    const auto pop = read_json(dir / "population.json");
    for (const auto& p : pop["population"]) {
      const double t = p["t"].get<double>();
      const double expected = c.rho * vol * std::exp((c.lambda_b - c.lambda_d) * t);
      const double mean = p["mean"].get<double>(), se = p["se"].get<double>();
      rep.add({"mean_population_t" + fmt(t), expected, mean, 4.0 * se, std::abs(mean - expected) <= 4.0 * se, true,
               false, "within 4 SE"});
    }

    if (!is_critical(c)) return rep;  // the spectral formulas describe the critical model only

    const auto spec = group_by_t(read_csv(dir / "spectral_bins.csv"));
    const auto est = group_by_t(read_csv(dir / "estimate.csv"));
    const auto estp = group_by_t(read_csv(dir / "estimate_projected.csv"));

    std::vector<double> reference;  // projected stationary bins, or rho^2 without one
    const double inf = std::numeric_limits<double>::infinity();
    if (auto it = spec.find(inf); it != spec.end()) {
      for (const auto& row : it->second) reference.push_back(row[3]);
    } else {
      reference.assign(static_cast<std::size_t>(c.bins), c.rho * c.rho);
    }

    ConvergenceCurve curve;
    std::vector<std::pair<double, double>> origin;  // (k_proj bin 0, se)
    for (const auto& [t, rows] : est) {
      auto sit = spec.find(t);
      if (sit == spec.end() || sit->second.size() != rows.size()) {
        throw std::invalid_argument("mismatched grids: no spectral bins for t=" + fmt(t));
      }
      std::vector<double> k, se, ref;
      for (std::size_t b = 0; b < rows.size(); ++b) {
        k.push_back(rows[b][2]);
        se.push_back(rows[b][3]);
        ref.push_back(sit->second[b][2]);
      }
      const auto agree = compare_bins(k, se, ref, 3.0);
      rep.add({"pair_bins_within_3se_t" + fmt(t), 0.95, agree.fraction(), 0.95, agree.fraction() >= 0.95, true, false,
               std::to_string(agree.within) + "/" + std::to_string(agree.total) + " bins"});

      const auto& prow = estp.at(t);
      ConvergencePoint cp;
      cp.time = t;
      for (std::size_t b = 0; b < prow.size(); ++b) {
        const double dev = std::abs(prow[b][2] - reference[b]);
        if (b == 0 || dev > cp.deviation) {
          cp.deviation = dev;
          cp.se = prow[b][3];
          cp.bin = b;
        }
      }
      curve.points.push_back(cp);
      origin.emplace_back(prow[0][2], prow[0][3]);
    }

    if (curve.points.size() >= 2) {
      const bool dec = curve.strictly_decreasing();
      std::string detail;
      for (const auto& p : curve.points) detail += "t=" + fmt(p.time) + ":" + fmt(p.deviation) + "+-" + fmt(p.se) + " ";
      rep.add({"sup_deviation_strictly_decreasing", curve.points.front().deviation, curve.points.back().deviation, 0.0,
               dec, finite, !finite, detail});
    }
    if (origin.size() >= 2) {
      if (finite) {
        // near-origin estimates stay below the stationary value (monotone approach)
        bool bounded = true;
        for (const auto& [k, se] : origin) bounded = bounded && k <= reference[0] + 3.0 * se;
        rep.add({"near_origin_bounded", reference[0], origin.back().first, 3.0 * origin.back().second, bounded, true,
                 false, "k_hat(bin 0) <= stationary + 3 SE at every time"});
      } else {
        bool grows = true;
        for (std::size_t i = 2; i < origin.size(); ++i) {
          grows = grows && origin[i].first - origin[i - 1].first > std::hypot(origin[i].second, origin[i - 1].second);
        }
        rep.add({"near_origin_growth", origin[1].first, origin.back().first, 0.0, grows, true, false,
                 "k_hat(bin 0) increases beyond SE across t > 0"});
      }
    }

    const auto ds = read_json(dir / "density_stats.json");
    const auto var = ds["variance"].get<std::vector<double>>();
    const auto vse = ds["variance_se"].get<std::vector<double>>();
    const auto pred = ds["predicted"].get<std::vector<double>>();
    const auto sides = ds["window_sides"].get<std::vector<double>>();
    bool dec = true;
    for (std::size_t i = 1; i < var.size(); ++i) dec = dec && var[i] < var[i - 1];
    rep.add({"lln_variance_decreasing", var.empty() ? 0.0 : var.front(), var.empty() ? 0.0 : var.back(), 0.0, dec, true,
             false, "Var(N(V)/|V|) over nested windows"});
    for (std::size_t i = 0; i < pred.size() && i < var.size(); ++i) {
      rep.add({"lln_prediction_side" + fmt(sides[i]), pred[i], var[i], 3.0 * vse[i],
               std::abs(var[i] - pred[i]) <= 3.0 * vse[i], true, false, "within 3 SE"});
    }
    return rep;
  });
}

inline void write_report(const ExperimentConfig& c, const ComparisonReport& rep) {
  const auto prov = provenance(c);
  write_json(c.output_path() / "report.json", rep.to_json(), prov);
  auto out = open_output(c.output_path() / "report.txt");
  out << "# config_hash=" << prov.config_hash << " seed=" << prov.seed << "\n" << rep.table();
}

/// validate -> spectral -> simulate -> estimate -> compare, writing every
/// intermediate artifact under the output directory.
inline ComparisonReport run_pipeline(const ExperimentConfig& c) {
  c.validate();
  {
    auto out = open_output(c.output_path() / "config.json");
    out << to_json(c).dump(2) << "\n";
  }
  validate_stage(c);
  spectral_stage(c);
  auto sim = simulate_stage(c);
  estimate_stage(c, sim.snapshots);
  auto rep = compare_stage(c);
  write_report(c, rep);
  return rep;
}

}  // namespace contact
