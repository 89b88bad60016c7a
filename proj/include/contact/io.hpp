#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "contact/simulator.hpp"

namespace contact {

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fmt_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Opens a file for writing, creating parent directories.
inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

inline void write_csv_header(std::ostream& out, const Provenance& prov, const std::string& columns) {
  out << "# config_hash=" << prov.config_hash << " seed=" << prov.seed << "\n" << columns << "\n";
}

inline void write_json(const std::filesystem::path& path, nlohmann::json j, const Provenance& prov) {
  j["provenance"] = {{"config_hash", prov.config_hash}, {"seed", prov.seed}};
  auto out = open_output(path);
  out << j.dump(2) << "\n";
}

/// Numeric CSV: '#' lines are comments, the first other line is the header.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw std::invalid_argument("csv: missing column '" + name + "'");
  }
};

inline double parse_number(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("csv: bad number '" + s + "'");
  return v;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header) {
      t.columns = cells;
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw std::invalid_argument("csv: row width differs from header in " + path.string());
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c));
    t.rows.push_back(std::move(row));
  }
  if (!header) throw std::invalid_argument("csv: no header in " + path.string());
  return t;
}

/// Snapshot records `run_id,time,x1[,x2]`, one point per line. Empty
/// configurations are recorded as a line with no coordinates so that every
/// (run, time) pair appears.
class SnapshotWriter {
 public:
  SnapshotWriter(const std::filesystem::path& path, int dim, const Provenance& prov)
      : out_(open_output(path)), dim_(dim) {
    write_csv_header(out_, prov, dim == 1 ? "run_id,time,x1" : "run_id,time,x1,x2");
  }

  void write(std::size_t run_id, const Snapshot& s) {
    const std::string prefix = std::to_string(run_id) + "," + fmt_exact(s.time);
    if (s.config.points.empty()) {
      out_ << prefix << (dim_ == 1 ? ",nan" : ",nan,nan") << "\n";
      return;
    }
    for (const auto& p : s.config.points) {
      out_ << prefix << "," << fmt_exact(p[0]);
      if (dim_ == 2) out_ << "," << fmt_exact(p[1]);
      out_ << "\n";
    }
  }

 private:
  std::ofstream out_;
  int dim_;
};

/// Snapshots grouped by time, configurations ordered by run id.
inline std::map<double, std::vector<Configuration>> read_snapshots(const std::filesystem::path& path,
                                                                   int dim, double L) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::map<double, std::map<long, Configuration>> grouped;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != static_cast<std::size_t>(2 + dim)) {
      throw std::invalid_argument("snapshots: expected " + std::to_string(2 + dim) + " columns");
    }
    const long run = std::stol(cells[0]);
    const double t = parse_number(cells[1]);
    auto& cfg = grouped[t][run];
    cfg.dimension = dim;
    cfg.length = L;
    const double x = parse_number(cells[2]);
    if (std::isnan(x)) continue;
    cfg.points.push_back({x, dim == 2 ? parse_number(cells[3]) : 0.0});
  }
  std::map<double, std::vector<Configuration>> out;
  for (auto& [t, runs] : grouped) {
    for (auto& [id, cfg] : runs) out[t].push_back(std::move(cfg));
  }
  return out;
}

}  // namespace contact
