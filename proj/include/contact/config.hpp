#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "contact/kernel.hpp"

namespace contact {

using nlohmann::json;

struct KernelSpec {
  KernelFamily family = KernelFamily::SymmetricStable;
  double alpha = 0.5;
  double scale = 1.0;
  int dimension = 1;

  DispersalKernel build() const { return {family, dimension, alpha, scale}; }
  bool operator==(const KernelSpec&) const = default;
};

struct JumpSpec {
  KernelSpec shape;
  double mass = 1.0;

  JumpKernel build() const { return {shape.build(), mass}; }
  bool operator==(const JumpSpec&) const = default;
};

/// Everything an experiment needs; serializes to a single JSON document.
struct ExperimentConfig {
  std::string name = "experiment";
  int dimension = 1;
  KernelSpec kernel;
  std::optional<JumpSpec> jump;
  double rho = 1.0;
  double torus_length = 200.0;
  double lambda_b = 1.0;
  double lambda_d = 1.0;
  std::vector<double> times{0.0, 2.0, 5.0, 20.0};
  std::size_t runs = 100;
  std::uint64_t master_seed = 1;
  std::size_t n_max = 1'000'000;
  int bins = 64;
  std::vector<double> windows;         // LLN window sides; empty: L/32 .. L
  int lattice_size = 512;              // hierarchy M
  double lattice_spacing = 0.0;        // 0: torus_length / lattice_size
  int hierarchy_order = 2;
  double hierarchy_dt = 0.025;
  std::vector<double> growth_times{10.0, 100.0, 1000.0};
  int radial_points = 101;             // spectral CSV grid on [0, L/2]
  bool write_snapshots = true;
  std::string output_dir;              // "": results/<name>

  double spacing() const { return lattice_spacing > 0.0 ? lattice_spacing : torus_length / lattice_size; }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }

  std::vector<double> window_sides() const {
    if (!windows.empty()) return windows;
    std::vector<double> w;
    for (int k = 5; k >= 0; --k) w.push_back(torus_length / (1 << k));
    return w;
  }

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw std::invalid_argument(field + ": " + why);
    };
    if (dimension != 1 && dimension != 2) fail("dimension", "must be 1 or 2");
    if (kernel.dimension != dimension) fail("kernel.dimension", "must equal dimension");
    (void)kernel.build();  // family/alpha/scale checks
    if (jump) {
      if (jump->shape.dimension != dimension) fail("jump.dimension", "must equal dimension");
      (void)jump->build();
    }
    if (!(rho >= 0.0) || !std::isfinite(rho)) fail("rho", "must be non-negative");
    if (!(torus_length > 0.0) || !std::isfinite(torus_length)) fail("torus_length", "must be positive");
    if (!(lambda_b >= 0.0)) fail("lambda_b", "must be non-negative");
    if (!(lambda_d >= 0.0)) fail("lambda_d", "must be non-negative");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!(times[i] >= 0.0)) fail("times", "must be non-negative");
      if (i > 0 && !(times[i] > times[i - 1])) fail("times", "must be strictly increasing");
    }
    if (runs < 1) fail("runs", "must be at least 1");
    if (n_max < 1) fail("n_max", "must be at least 1");
    if (bins < 1) fail("bins", "must be at least 1");
    for (double w : window_sides()) {
      if (!(w > 0.0) || w > torus_length) fail("windows", "sides must lie in (0, torus_length]");
    }
    if (lattice_size < 2) fail("lattice.size", "must be at least 2");
    if (!(lattice_spacing >= 0.0)) fail("lattice.spacing", "must be positive");
    if (hierarchy_order < 2 || hierarchy_order > 3) fail("hierarchy.order", "must be 2 or 3");
    if (!(hierarchy_dt > 0.0) || hierarchy_dt > 0.1 / hierarchy_order) {
      fail("hierarchy.dt", "must be in (0, 0.1/order]");
    }
    for (std::size_t i = 0; i < growth_times.size(); ++i) {
      if (!(growth_times[i] > 0.0) || (i > 0 && !(growth_times[i] > growth_times[i - 1]))) {
        fail("growth_times", "must be positive and strictly increasing");
      }
    }
    if (radial_points < 2) fail("radial_points", "must be at least 2");
  }

  /// Output directory with the CONTACT_OUTPUT_ROOT override applied to relative paths.
  std::filesystem::path output_path() const {
    std::filesystem::path p = output_dir.empty() ? std::filesystem::path("results") / name
                                                 : std::filesystem::path(output_dir);
    if (p.is_relative()) {
      if (const char* root = std::getenv("CONTACT_OUTPUT_ROOT"); root && *root) {
        return std::filesystem::path(root) / p;
      }
    }
    return p;
  }
};

inline json kernel_to_json(const KernelSpec& k) {
  return {{"family", std::string(to_string(k.family))},
          {"alpha", k.alpha},
          {"scale", k.scale},
          {"dimension", k.dimension}};
}

// j.value(key, fallback) with a type error reported against the field name
template <class T>
T field_value(const json& j, const char* key, T fallback, const std::string& where) {
  try {
    return j.value(key, fallback);
  } catch (const json::exception&) {
    throw std::invalid_argument(where + "." + key + ": wrong type");
  }
}

inline KernelSpec kernel_from_json(const json& j, int default_dim, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": must be an object");
  KernelSpec k;
  try {
    k.family = family_from_string(j.at("family").get<std::string>());
  } catch (const json::exception&) {
    throw std::invalid_argument(where + ".family: required string");
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(where + ".family: " + std::string(e.what()));
  }
  k.alpha = field_value(j, "alpha", k.family == KernelFamily::Cauchy ? 1.0
                                    : k.family == KernelFamily::SymmetricStable ? 0.5 : 2.0, where);
  k.scale = field_value(j, "scale", 1.0, where);
  k.dimension = field_value(j, "dimension", default_dim, where);
  if (k.family == KernelFamily::SymmetricStable && !(k.alpha > 0.0 && k.alpha <= 2.0)) {
    throw std::invalid_argument(where + ".alpha: must be in (0, 2] for SymmetricStable, got " +
                                std::to_string(k.alpha));
  }
  if (!(k.scale > 0.0)) throw std::invalid_argument(where + ".scale: must be positive");
  return k;
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["dimension"] = c.dimension;
  j["kernel"] = kernel_to_json(c.kernel);
  if (c.jump) {
    json jj = kernel_to_json(c.jump->shape);
    jj["mass"] = c.jump->mass;
    j["jump"] = jj;
  } else {
    j["jump"] = nullptr;
  }
  j["rho"] = c.rho;
  j["torus_length"] = c.torus_length;
  j["lambda_b"] = c.lambda_b;
  j["lambda_d"] = c.lambda_d;
  j["times"] = c.times;
  j["runs"] = c.runs;
  j["master_seed"] = c.master_seed;
  j["n_max"] = c.n_max;
  j["bins"] = c.bins;
  j["windows"] = c.windows;
  j["lattice"] = {{"size", c.lattice_size}, {"spacing", c.lattice_spacing}};
  j["hierarchy"] = {{"order", c.hierarchy_order}, {"dt", c.hierarchy_dt}};
  j["growth_times"] = c.growth_times;
  j["radial_points"] = c.radial_points;
  j["write_snapshots"] = c.write_snapshots;
  j["output_dir"] = c.output_dir;
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  ExperimentConfig c;
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key) || j[key].is_null()) return;
    try {
      j[key].get_to(field);
    } catch (const json::exception&) {
      throw std::invalid_argument(std::string(key) + ": wrong type");
    }
  };
  get("name", c.name);
  get("dimension", c.dimension);
  if (!j.contains("kernel")) throw std::invalid_argument("kernel: required");
  c.kernel = kernel_from_json(j["kernel"], c.dimension, "kernel");
  if (j.contains("jump") && !j["jump"].is_null()) {
    JumpSpec js;
    js.shape = kernel_from_json(j["jump"], c.dimension, "jump");
    js.mass = field_value(j["jump"], "mass", 1.0, "jump");
    if (!(js.mass >= 0.0)) throw std::invalid_argument("jump.mass: must be non-negative");
    c.jump = js;
  }
  get("rho", c.rho);
  get("torus_length", c.torus_length);
  get("lambda_b", c.lambda_b);
  get("lambda_d", c.lambda_d);
  get("times", c.times);
  get("runs", c.runs);
  get("master_seed", c.master_seed);
  get("n_max", c.n_max);
  get("bins", c.bins);
  get("windows", c.windows);
  if (j.contains("lattice") && j["lattice"].is_object()) {
    c.lattice_size = field_value(j["lattice"], "size", c.lattice_size, "lattice");
    c.lattice_spacing = field_value(j["lattice"], "spacing", c.lattice_spacing, "lattice");
  }
  if (j.contains("hierarchy") && j["hierarchy"].is_object()) {
    c.hierarchy_order = field_value(j["hierarchy"], "order", c.hierarchy_order, "hierarchy");
    c.hierarchy_dt = field_value(j["hierarchy"], "dt", c.hierarchy_dt, "hierarchy");
  }
  get("growth_times", c.growth_times);
  get("radial_points", c.radial_points);
  get("write_snapshots", c.write_snapshots);
  get("output_dir", c.output_dir);
  c.validate();
  return c;
}

/// Bundled experiments: heavy_d1 (stable alpha = 0.5), light_d1_gaussian
/// (clustering control) and jump_d1 (Gaussian dispersal with stable jumps).
inline std::vector<std::string> preset_names() { return {"heavy_d1", "light_d1_gaussian", "jump_d1"}; }

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.dimension = 1;
  c.rho = 1.0;
  c.torus_length = 200.0;
  c.times = {0.0, 2.0, 5.0, 20.0};
  c.master_seed = 20240601;
  c.bins = 64;
  c.lattice_size = 512;
  if (name == "heavy_d1") {
    c.kernel = {KernelFamily::SymmetricStable, 0.5, 1.0, 1};
    c.runs = 5000;
  } else if (name == "light_d1_gaussian") {
    c.kernel = {KernelFamily::Gaussian, 2.0, 1.0, 1};
    c.runs = 2000;
  } else if (name == "jump_d1") {
    c.kernel = {KernelFamily::Gaussian, 2.0, 1.0, 1};
    c.jump = JumpSpec{{KernelFamily::SymmetricStable, 0.5, 1.0, 1}, 1.0};
    c.runs = 2000;
  } else {
    throw std::invalid_argument("preset: unknown name '" + name + "'");
  }
  return c;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the canonical JSON form, ignoring where outputs are written.
inline std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace contact
