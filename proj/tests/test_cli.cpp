#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path p = [] {
    auto d = fs::temp_directory_path() / "contact_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CONTACT_CLI_PATH + "\" " + args + " >> \"" +
                          (workdir() / "cli.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json load(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  return nlohmann::json::parse(in);
}

void write_field(const fs::path& p, double shift) {
  std::ofstream out(p);
  out << "# config_hash=test seed=0\nr,k2\n";
  for (int i = 0; i <= 10; ++i) out << i * 0.5 << "," << 2.0 / (1.0 + i) + shift << "\n";
}

}  // namespace

TEST_CASE("invalid input exits with status 2", "[cli]") {
  CHECK(cli("validate --preset heavy_d1 --alpha 2.5") == 2);
  CHECK(cli("validate --preset no_such_preset") == 2);
  CHECK(cli("validate --preset heavy_d1 --set kernel.alpha=abc") == 2);
  CHECK(cli("validate --bogus-flag") == 2);
  CHECK(cli("spectral --config /nonexistent/config.json") == 2);
}

TEST_CASE("validate and spectral on presets", "[cli]") {
  const auto out = workdir() / "spectral";
  CHECK(cli("validate --preset heavy_d1 -o \"" + out.string() + "\"") == 0);
  CHECK(cli("validate --config \"" + std::string(CONTACT_CONFIG_DIR) + "/jump_d1.json\" -o \"" + out.string() + "\"") == 0);
  CHECK(cli("spectral --preset heavy_d1 --set radial_points=11 -o \"" + out.string() + "\"") == 0);
  REQUIRE(fs::exists(out / "spectral.csv"));
  const auto lemma = load(out / "lemma1.json");
  CHECK(lemma["finite"] == true);
  CHECK(lemma["provenance"].contains("config_hash"));
}

TEST_CASE("compare --fields", "[cli]") {
  const auto a = workdir() / "a.csv", b = workdir() / "b.csv";
  write_field(a, 0.0);
  write_field(b, 0.001);
  CHECK(cli("compare --fields \"" + a.string() + "\" \"" + a.string() + "\" --tol 1e-12") == 0);
  CHECK(cli("compare --fields \"" + a.string() + "\" \"" + b.string() + "\" --tol 1e-2") == 0);
  CHECK(cli("compare --fields \"" + a.string() + "\" \"" + b.string() + "\" --tol 1e-4") == 1);
  std::ofstream(workdir() / "short.csv") << "r,k2\n0,1\n";
  CHECK(cli("compare --fields \"" + a.string() + "\" \"" + (workdir() / "short.csv").string() + "\"") == 2);
}

TEST_CASE("hierarchy agrees with the spectral torus field", "[cli]") {
  const auto out = workdir() / "hier";
  CHECK(cli("hierarchy --preset heavy_d1 --size 128 --spacing 0.5 --horizon 2 -o \"" + out.string() + "\"") == 0);
  const auto j = load(out / "hierarchy.json");
  CHECK(j["pass"] == true);
  CHECK(j["spectral_relative_sup_deviation"].get<double>() < 1e-2);
  CHECK(fs::exists(out / "hierarchy.csv"));
}

TEST_CASE("small pipeline run reports a verdict", "[cli]") {
  const auto out = workdir() / "pipe";
  const int code = cli("pipeline --preset heavy_d1 --runs 40 --set torus_length=40 --set bins=16 "
                       "--set lattice.size=64 --set times=[0,1,2] --set growth_times=[10,100] -o \"" +
                       out.string() + "\"");
  REQUIRE((code == 0 || code == 1));
  const auto rep = load(out / "report.json");
  CHECK(rep["verdict"] == (code == 0 ? "pass" : "fail"));
  CHECK(fs::exists(out / "estimate.csv"));
  CHECK(fs::exists(out / "report.txt"));
}
