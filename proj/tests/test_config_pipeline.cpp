#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/pipeline.hpp"
#include "core/serialize.hpp"

using namespace rdstab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path tmpdir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("rdstab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("preset configs parse and expose the expected values") {
  ExperimentConfig c = ExperimentConfig::from_text(preset_text("repro-sec5-h1"));
  CHECK(c.theta1 == doctest::Approx(M_PI / 2));
  CHECK(c.theta2 == doctest::Approx(0.0));
  CHECK(c.q_tilde(0.4) == doctest::Approx(-3.0));
  CHECK(c.N == 3);
  CHECK(c.delta == doctest::Approx(0.3));
  CHECK(c.dk_phi == doctest::Approx(0.5));
  CHECK(theorem_name(c.theorem) == std::string("t3"));
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset_text(name));
}

TEST_CASE("config rejects unknown keys and bad ranges") {
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_text("[plant]\nbogus = 1\n"),
                       doctest::Contains("unknown configuration key"),
                       std::invalid_argument);
  CHECK_THROWS(ExperimentConfig::from_text("[nosuch]\nx = 1\n"));
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_text("[plant]\ntheta1 = 0\n"),
                       doctest::Contains("(0, pi/2]"), std::invalid_argument);
}

TEST_CASE("synth pipeline writes the gain file") {
  ExperimentConfig cfg = ExperimentConfig::from_text(preset_text("repro-sec5-h1"));
  cfg.grid_resolution = 501;
  fs::path out = tmpdir("synth");
  nlohmann::json summary = run_synth(cfg, out.string());
  CHECK(summary["N0"] == 1);
  auto jg = nlohmann::json::parse(slurp(out / "gains.json"));
  CHECK(std::abs(jg["K"][0].get<double>() - (-0.8250)) <= 5e-4);
  CHECK(std::abs(jg["L"][0].get<double>() - 1.2958) <= 5e-4);
  GainSet g = gains_from_json(jg);
  CHECK(g.N0 == 1);
}

TEST_CASE("eig pipeline residuals grow ~4x when the resolution is halved") {
  ExperimentConfig cfg = ExperimentConfig::from_text(preset_text("repro-sec5-h1"));
  cfg.p = Coefficient::parse("poly(1, 0, 0.5)");
  cfg.q_tilde = Coefficient::parse("poly(-3, 1)");
  cfg.grid_resolution = 1001;
  fs::path out = tmpdir("eig_a");
  nlohmann::json a = run_eig(cfg, out.string());
  cfg.grid_resolution = 501;
  fs::path out2 = tmpdir("eig_b");
  nlohmann::json b = run_eig(cfg, out2.string());
  auto ja = nlohmann::json::parse(slurp(out / "basis.json"));
  auto jb = nlohmann::json::parse(slurp(out2 / "basis.json"));
  double ra = ja["diagnostics"]["max_eigen_residual"].get<double>();
  double rb = jb["diagnostics"]["max_eigen_residual"].get<double>();
  CHECK(rb / ra > 2.0);
  CHECK(rb / ra < 8.0);  // order-2 scheme: ~4x
  CHECK(ja["diagnostics"]["pass"].get<bool>());
}

TEST_CASE("simulate pipeline is deterministic byte for byte") {
  ExperimentConfig cfg = ExperimentConfig::from_text(preset_text("repro-sec5-h1"));
  cfg.grid_resolution = 501;
  cfg.mesh_nodes = 101;
  cfg.t_final = 2.0;
  cfg.dt = 2e-3;
  fs::path o1 = tmpdir("sim1"), o2 = tmpdir("sim2");
  run_simulate(cfg, o1.string());
  run_simulate(cfg, o2.string());
  CHECK(slurp(o1 / "trajectory.csv") == slurp(o2 / "trajectory.csv"));
  CHECK(slurp(o1 / "snapshots.json") == slurp(o2 / "snapshots.json"));
}

TEST_CASE("check pipeline produces a verifiable certificate file") {
  ExperimentConfig cfg = ExperimentConfig::from_text(preset_text("repro-sec5-h1"));
  cfg.grid_resolution = 501;
  fs::path out = tmpdir("check");
  nlohmann::json summary = run_check(cfg, out.string());
  REQUIRE(summary["feasible"].get<bool>());

  // audit path: re-verify from the file
  nlohmann::json again = run_check(cfg, out.string(), (out / "certificate.json").string());
  CHECK(again["feasible"].get<bool>());

  // tampering flips the verdict loudly
  auto j = nlohmann::json::parse(slurp(out / "certificate.json"));
  for (auto& row : j["P"])
    for (auto& vv : row) vv = -vv.get<double>();
  std::ofstream(out / "tampered.json") << j.dump();
  nlohmann::json bad = run_check(cfg, out.string(), (out / "tampered.json").string());
  CHECK_FALSE(bad["feasible"].get<bool>());
}

TEST_CASE("sweep requires an axis") {
  ExperimentConfig cfg = ExperimentConfig::from_text(preset_text("repro-sec5-h1"));
  fs::path out = tmpdir("sweep_err");
  CHECK_THROWS(run_sweep(cfg, out.string()));
}

TEST_CASE("sweep over N reports feasibility per dimension") {
  ExperimentConfig cfg = ExperimentConfig::from_text(preset_text("repro-sec5-h1"));
  cfg.grid_resolution = 501;
  cfg.sweep_axis = "n";
  cfg.sweep_values = {2, 3};
  fs::path out = tmpdir("sweep_n");
  nlohmann::json s = run_sweep(cfg, out.string());
  CHECK(s["rows"].size() == 2u);
  CHECK(slurp(out / "sweep.csv").find("N,feasible") == 0u);
}
