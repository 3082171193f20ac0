#include "doctest.h"

#include <filesystem>
#include <set>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "runner.hpp"

using namespace tbnls;
using namespace tbnls::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tbnls_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const ExperimentConfig c = parse_config("[lattice]\npotential = sin2\n");
  CHECK(c.lattice.num_cells == 16);
  CHECK(c.lattice.points_per_cell == 256);
  CHECK(c.lattice.perturbation.name == "w-cos");
  CHECK(c.hbar == 0.1);
  CHECK(c.hbar_list.size() == 5);
  CHECK(c.model == Regime::model1);
  CHECK(c.scheme == SplitScheme::bloch_exact);
  CHECK(c.monitor_stride == 50);
}

TEST_CASE("all violations are reported with line numbers") {
  const std::string text =
      "[lattice]\n"        // 1
      "N = 7\n"            // 2
      "M = abc\n"          // 3
      "colour = red\n"     // 4
      "[semiclassical]\n"  // 5
      "hbar = 0.1\n"       // 6
      "hbar = 0.2\n"       // 7
      "hbar_list = 0.1, 0.12\n";  // 8
  try {
    parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2: N must be even") != std::string::npos);
    CHECK(msg.find("line 3:") != std::string::npos);
    CHECK(msg.find("line 4: unknown key 'lattice.colour'") != std::string::npos);
    CHECK(msg.find("lines 6 and 7") != std::string::npos);
    CHECK(msg.find("strictly decreasing") != std::string::npos);
    CHECK(e.issues().size() >= 5);
  }
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(parse_config("N = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nowhere]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[lattice\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[lattice]\nN 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[lattice]\npotential = gaussian\n"), ConfigError);
}

TEST_CASE("overrides replace single keys") {
  const ExperimentConfig c =
      parse_config("[semiclassical]\nhbar = 0.1\n", {"semiclassical.hbar=0.08", "lattice.N=8"});
  CHECK(c.hbar == 0.08);
  CHECK(c.lattice.num_cells == 8);
  CHECK_THROWS_AS(parse_config("", {"semiclassical.nope=1"}), ConfigError);
  CHECK_THROWS_AS(parse_config("", {"hbar=1"}), ConfigError);
}

TEST_CASE("serialize and parse round-trip losslessly") {
  ExperimentConfig c;
  c.hbar = 0.1 / 3.0;
  c.hbar_list = {0.2, 1.0 / 7.0, 0.05};
  c.model = Regime::custom;
  c.F = 1e-3 / 3.0;
  c.eta = -0.25;
  c.lattice.perturbation.name = "w-tanh";
  c.lattice.perturbation.length = 2.5;
  c.scheme = SplitScheme::kinetic_potential;
  c.seed = 123456789012345ULL;
  c.snapshots = true;
  const ExperimentConfig back = parse_config(serialize(c));
  CHECK(back.hbar == c.hbar);
  CHECK(back.hbar_list == c.hbar_list);
  CHECK(back.F == c.F);
  CHECK(back.seed == c.seed);
  CHECK(back.scheme == c.scheme);
  CHECK(back == c);
}

TEST_CASE("sha256 of known input") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("bands command writes CSVs and a complete manifest") {
  ExperimentConfig c = parse_config("", {"lattice.N=8", "lattice.M=64"});
  c.output_directory = scratch("bands").string();
  std::ostringstream log;
  REQUIRE(run("bands", c, log) == kOk);
  const fs::path dir = c.output_directory;
  const std::string summary = slurp(dir / "band_summary.csv");
  CHECK(summary.rfind("hbar,E1_bottom,E1_top,E2_bottom,gap,bandwidth\n", 0) == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "OK");
  CHECK(manifest["config_sha256"] == sha256_hex(serialize(c)));
  std::set<std::string> listed;
  for (const auto& a : manifest["artifacts"]) {
    listed.insert(a["file"].get<std::string>());
    CHECK(a["sha256"] == sha256_file(dir / a["file"].get<std::string>()));
  }
  CHECK(listed.count("bands.csv") == 1);
  CHECK(listed.count("band_summary.csv") == 1);
  // positive first gap
  std::istringstream rows(summary);
  std::string header, line;
  std::getline(rows, header);
  std::getline(rows, line);
  std::vector<double> cells;
  std::stringstream ls(line);
  for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(std::stod(cell));
  CHECK(cells.at(4) > 0.0);
}

TEST_CASE("reruns are byte-identical") {
  ExperimentConfig c = parse_config("", {"lattice.N=8", "lattice.M=64", "semiclassical.hbar=0.12",
                                         "integrator.min_steps=200", "run.initial_state=random",
                                         "run.seed=7"});
  std::ostringstream log;
  const fs::path a = scratch("a"), b = scratch("b");
  c.output_directory = a.string();
  REQUIRE(run("simulate", c, log) == kOk);
  c.output_directory = b.string();
  REQUIRE(run("simulate", c, log) == kOk);
  for (const char* f : {"reduction_error.csv", "conservation.csv", "dnls_trajectory.csv", "summary.csv"})
    CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("module failures name the stage and keep a FAILED manifest") {
  ExperimentConfig c = parse_config("", {"lattice.N=8", "lattice.M=16", "semiclassical.hbar=0.01"});
  c.output_directory = scratch("fail").string();
  std::ostringstream log;
  CHECK(run("basis", c, log) == kNumericalFailure);
  const auto manifest = nlohmann::json::parse(slurp(fs::path(c.output_directory) / "manifest.json"));
  CHECK(manifest["status"] == "FAILED");
  CHECK(manifest["failed_stage"] == "localized-basis");
}

TEST_CASE("diagnose writes the remainder table") {
  ExperimentConfig c = parse_config("", {"lattice.N=8", "lattice.M=64", "semiclassical.hbar=0.12",
                                         "integrator.min_steps=400"});
  c.output_directory = scratch("diag").string();
  std::ostringstream log;
  REQUIRE(run("diagnose", c, log) == kOk);
  const std::string rem = slurp(fs::path(c.output_directory) / "remainders.csv");
  CHECK(rem.rfind("tau,r1,F_r2,F_r3,eta_r4,A,B,total,perp,triangle_ok\n", 0) == 0);
}
