// Command-line driver: validate, spectral, hierarchy, simulate, estimate,
// compare and pipeline subcommands over one JSON experiment config.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "contact/pipeline.hpp"

using namespace contact;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Overrides {
  std::string config_path;
  std::string preset_name;
  std::vector<std::string> sets;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<double> rho;
  std::optional<std::string> out;
  bool no_snapshots = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config_path, "experiment config (JSON)");
  app->add_option("-p,--preset", o.preset_name, "bundled preset: heavy_d1, light_d1_gaussian, jump_d1");
  app->add_option("--set", o.sets, "override a field, e.g. --set kernel.alpha=0.8 (value is JSON)");
  app->add_option("--runs", o.runs, "ensemble size");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--alpha", o.alpha, "kernel tail exponent");
  app->add_option("--rho", o.rho, "particle density");
  app->add_option("-o,--out", o.out, "output directory");
  app->add_flag("--no-snapshots", o.no_snapshots, "do not write snapshots.csv");
}

ExperimentConfig load_config(const Overrides& o) {
  json j;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw std::invalid_argument("config: cannot open " + o.config_path);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("config: ") + e.what());
    }
  } else if (!o.preset_name.empty()) {
    j = to_json(preset(o.preset_name));
  } else {
    throw std::invalid_argument("either --config or --preset is required");
  }
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    std::string key = s.substr(0, eq);
    for (auto& ch : key) {
      if (ch == '.') ch = '/';
    }
    json value;
    try {
      value = json::parse(s.substr(eq + 1));
    } catch (const json::parse_error&) {
      value = s.substr(eq + 1);
    }
    j[json::json_pointer("/" + key)] = value;
  }
  if (o.runs) j["runs"] = *o.runs;
  if (o.seed) j["master_seed"] = *o.seed;
  if (o.alpha) j["kernel"]["alpha"] = *o.alpha;
  if (o.rho) j["rho"] = *o.rho;
  if (o.out) j["output_dir"] = *o.out;
  if (o.no_snapshots) j["write_snapshots"] = false;
  return config_from_json(j);
}

int cmd_validate(const ExperimentConfig& c) {
  const auto j = validate_stage(c);
  const auto lemma = build_model(c).lemma1();
  json out = j;
  out["lemma1"] = to_json(lemma);
  std::cout << out.dump(2) << "\n";
  const auto& k = j["kernel"];
  const bool ok = k["norm_residual"].get<double>() < normalization_tolerance(c.dimension) &&
                  k["max_abs_hat"].get<double>() < 1.0;
  return ok ? kPass : kCheckFailed;
}

int cmd_spectral(const ExperimentConfig& c) {
  spectral_stage(c);
  std::ifstream in(c.output_path() / "lemma1.json");
  std::cout << in.rdbuf();
  return kPass;
}

struct HierarchyFlags {
  std::optional<int> order;
  std::optional<int> size;
  std::optional<double> spacing;
  std::optional<double> horizon;
  std::optional<double> dt;
  bool stationary = false;
};

int cmd_hierarchy(ExperimentConfig c, const HierarchyFlags& f) {
  if (f.order) c.hierarchy_order = *f.order;
  if (f.size) c.lattice_size = *f.size;
  if (f.spacing) c.lattice_spacing = *f.spacing;
  if (f.dt) c.hierarchy_dt = *f.dt;
  c.validate();
  return run_stage("hierarchy", [&] {
    const auto prov = provenance(c);
    const auto kernel = c.kernel.build();
    const double h = c.spacing();
    const double L = c.lattice_size * h;
    LatticeKernel lk(kernel, c.lattice_size, h);
    const auto model = SpectralModel(kernel);
    json report;
    report["lattice"] = {{"size", c.lattice_size}, {"spacing", h}, {"length", L}, {"order", c.hierarchy_order}};
    std::vector<LatticeField> fields;
    std::optional<double> t;
    bool ok = true;
    if (f.stationary) {
      const auto res = stationary_fixed_point(kernel, lk, c.rho, c.hierarchy_order);
      json orders = json::array();
      for (const auto& r : res) {
        fields.push_back(r.field);
        const auto decay = decay_profile(r.field);
        json prof = json::array();
        for (const auto& [R, v] : decay.profile) prof.push_back({R, v});
        orders.push_back({{"order", r.field.order},
                          {"horizon", r.horizon},
                          {"residual", r.residual},
                          {"source_sup", r.source_sup},
                          {"source_mean_projected", r.source_mean},
                          {"decay_profile", prof},
                          {"far_value", decay.far_value},
                          {"near_deviation", decay.near_deviation}});
        ok = ok && r.residual < 1e-3;
      }
      report["orders"] = orders;
      const auto b = fit_bounds(c.rho, fields);
      report["bounds"] = {{"C", b.C}, {"D", b.D}, {"K", b.K}, {"holds", b.holds()}};
      ok = ok && b.holds();
    } else {
      t = f.horizon ? *f.horizon : c.horizon();
      fields = evolve_hierarchy(lk, c.rho, *t, c.hierarchy_dt, c.hierarchy_order);
      report["t"] = *t;
      report["dt"] = c.hierarchy_dt;
    }
    // order-2 field against the closed form on the same torus, cell averaged
    const auto [r, v] = radial_slice(fields.front());
    TorusGeometry geo{L, h, t.has_value()};
    const auto spec = model.torus(c.rho, t, r, geo);
    const auto cmp = compare_fields(r, spec.values, r, v, 1e-2, "hierarchy_vs_spectral");
    report["spectral_relative_sup_deviation"] = cmp.checks[1].observed;
    ok = ok && cmp.verdict();

    const std::string tl = t ? fmt(*t) : "inf";
    {
      auto out = open_output(c.output_path() / "hierarchy.csv");
      write_csv_header(out, prov, "r,t,k2,u2");
      for (std::size_t i = 0; i < r.size(); ++i) {
        out << fmt(r[i]) << "," << tl << "," << fmt(v[i]) << "," << fmt(v[i] - c.rho * c.rho) << "\n";
      }
    }
    {
      auto out = open_output(c.output_path() / "spectral_lattice.csv");
      write_csv_header(out, prov, "r,t,k2,u2");
      for (std::size_t i = 0; i < r.size(); ++i) {
        out << fmt(r[i]) << "," << tl << "," << fmt(spec.values[i]) << ","
            << fmt(spec.values[i] - c.rho * c.rho) << "\n";
      }
    }
    if (fields.size() > 1) {
      const auto& k3 = fields[1];
      const std::size_t block = lattice_sites(k3.dimension, k3.M, 2);
      auto out = open_output(c.output_path() / "hierarchy_k3.csv");
      write_csv_header(out, prov, "y1,y2,k3");
      // first-axis slice in d = 2
      const std::size_t stride = k3.dimension == 1 ? 1 : static_cast<std::size_t>(k3.M);
      for (int a = 0; a < k3.M; ++a) {
        for (int b = 0; b < k3.M; ++b) {
          out << fmt(a * h) << "," << fmt(b * h) << "," << fmt(k3.values[a * stride * block + b * stride]) << "\n";
        }
      }
    }
    report["pass"] = ok;
    write_json(c.output_path() / "hierarchy.json", report, prov);
    std::cout << report.dump(2) << "\n";
    return ok ? kPass : kCheckFailed;
  });
}

int cmd_simulate(const ExperimentConfig& c) {
  const auto sim = simulate_stage(c);
  json j{{"runs", sim.runs}, {"truncated", sim.truncated}, {"output_dir", c.output_path().string()}};
  std::cout << j.dump(2) << "\n";
  return kPass;
}

int cmd_estimate(const ExperimentConfig& c, const std::string& snapshots_path) {
  const fs::path p = snapshots_path.empty() ? c.output_path() / "snapshots.csv" : fs::path(snapshots_path);
  const auto snaps = run_stage("estimate", [&] { return read_snapshots(p, c.dimension, c.torus_length); });
  estimate_stage(c, snaps);
  std::ifstream in(c.output_path() / "density_stats.json");
  std::cout << in.rdbuf();
  return kPass;
}

int cmd_compare(const ExperimentConfig* c, const std::vector<std::string>& fields, double tol) {
  if (!fields.empty()) {
    if (fields.size() != 2) throw std::invalid_argument("--fields expects two CSV files");
    auto load = [](const std::string& path) {
      const auto t = read_csv(path);
      std::vector<double> r, k;
      for (const auto& row : t.rows) {
        r.push_back(row[t.column("r")]);
        k.push_back(row[t.column("k2")]);
      }
      return std::pair{r, k};
    };
    const auto [ra, ka] = load(fields[0]);
    const auto [rb, kb] = load(fields[1]);
    const auto rep = compare_fields(ra, ka, rb, kb, tol);
    std::cout << rep.table();
    return rep.verdict() ? kPass : kCheckFailed;
  }
  const auto rep = compare_stage(*c);
  write_report(*c, rep);
  std::cout << rep.table();
  return rep.verdict() ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical contact model: kernels, spectral correlation functions, lattice hierarchy, "
               "Monte Carlo ensembles and estimators"};
  app.require_subcommand(1);

  Overrides ov;
  auto* validate_cmd = app.add_subcommand("validate", "check kernel conditions and print the report");
  auto* spectral_cmd = app.add_subcommand("spectral", "closed-form pair correlation fields and the finiteness diagnostic");
  auto* hierarchy_cmd = app.add_subcommand("hierarchy", "lattice evolution / stationary solution of the hierarchy");
  auto* simulate_cmd = app.add_subcommand("simulate", "run the Monte Carlo ensemble");
  auto* estimate_cmd = app.add_subcommand("estimate", "pair correlation and LLN statistics from snapshots");
  auto* compare_cmd = app.add_subcommand("compare", "compare spectral predictions with estimates");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "validate, spectral, simulate, estimate, compare");
  for (auto* s : {validate_cmd, spectral_cmd, hierarchy_cmd, simulate_cmd, estimate_cmd, compare_cmd, pipeline_cmd}) {
    add_common(s, ov);
  }

  HierarchyFlags hf;
  hierarchy_cmd->add_option("--order", hf.order, "highest order, 2 or 3");
  hierarchy_cmd->add_option("--size", hf.size, "lattice sites per axis");
  hierarchy_cmd->add_option("--spacing", hf.spacing, "lattice spacing");
  hierarchy_cmd->add_option("--horizon", hf.horizon, "evolution time");
  hierarchy_cmd->add_option("--dt", hf.dt, "time step (<= 0.1/order)");
  hierarchy_cmd->add_flag("--stationary", hf.stationary, "solve for the stationary fields instead");

  std::string snapshots_path;
  estimate_cmd->add_option("--snapshots", snapshots_path, "snapshot file (default: <out>/snapshots.csv)");

  std::vector<std::string> field_files;
  double field_tol = 1e-2;
  compare_cmd->add_option("--fields", field_files, "compare two r,k2 CSV fields instead of pipeline outputs");
  compare_cmd->add_option("--tol", field_tol, "relative sup-norm tolerance for --fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (compare_cmd->parsed() && !field_files.empty()) return cmd_compare(nullptr, field_files, field_tol);
    const ExperimentConfig c = load_config(ov);
    if (validate_cmd->parsed()) return cmd_validate(c);
    if (spectral_cmd->parsed()) return cmd_spectral(c);
    if (hierarchy_cmd->parsed()) return cmd_hierarchy(c, hf);
    if (simulate_cmd->parsed()) return cmd_simulate(c);
    if (estimate_cmd->parsed()) return cmd_estimate(c, snapshots_path);
    if (compare_cmd->parsed()) return cmd_compare(&c, {}, field_tol);
    if (pipeline_cmd->parsed()) {
      const auto rep = run_pipeline(c);
      std::cout << rep.table();
      return rep.verdict() ? kPass : kCheckFailed;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}
