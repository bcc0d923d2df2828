#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "stepsel/errors.hpp"
#include "stepsel/experiment.hpp"
#include "stepsel/io.hpp"

using namespace stepsel;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "stepsel_test_experiment" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp_outputs(const std::filesystem::path& dir) {
  std::string all;
  for (const char* f : {"risk.csv", "freq.csv", "contribution.csv", "table.csv", "manifest.json"}) {
    all += read_text_file(dir / f);
  }
  return all;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.signal = builtin_signal("teeth-type");
  cfg.segmenters = {{KSegDP{8}, false, true, {}},
                    {Pelt{}, true, true, {}},
                    {WbsSsic{200, 1.01}, true, true, {}}};
  cfg.replications = 6;
  cfg.seed = 2024;
  return cfg;
}

}  // namespace

TEST_CASE("one replication with a single one-segment generator") {
  ExperimentConfig cfg;
  cfg.signal = builtin_signal("fms-type");
  cfg.segmenters = {{KSegDP{1}, false, true, {}}};
  cfg.replications = 1;
  cfg.seed = 5;
  const auto res = run_experiment(cfg);
  REQUIRE(res.report.risk.size() == 2);
  CHECK(res.report.risk[0].method == "ES");
  CHECK(res.report.risk[1].method == "kseg/k=1");
  CHECK(res.report.risk[0].risk == res.report.risk[1].risk);
  REQUIRE(res.report.contribution.size() == 1);
  CHECK(res.report.contribution[0].generator == "kseg");
  CHECK(res.report.contribution[0].freq == 1.0);
  CHECK(res.report.freq_of("ES").freq == std::vector<double>{1, 0, 0, 0, 0});
  CHECK(res.bound.checks == 1);
  CHECK(res.bound.violations == 0);
}

TEST_CASE("experiments are deterministic and independent of the worker count") {
  ExperimentConfig cfg = small_config();
  cfg.outliers = OutlierSpec{2, 20.0};
  const auto a = run_experiment(cfg);
  cfg.workers = 3;
  const auto b = run_experiment(cfg);
  const auto da = scratch("a");
  const auto db = scratch("b");
  cfg.workers = 1;
  write_experiment_outputs(da, cfg, a);
  write_experiment_outputs(db, cfg, b);
  CHECK(slurp_outputs(da) == slurp_outputs(db));
  CHECK(a.records.size() == 6);
  for (std::size_t r = 0; r < 6; ++r) CHECK(a.records[r].index == r);
  CHECK(a.bound.violations == 0);

  // A different seed changes the data.
  cfg.seed = 2025;
  const auto c = run_experiment(cfg);
  CHECK(c.report.risk_of("ES").risk != a.report.risk_of("ES").risk);
}

TEST_CASE("manifest records the run") {
  ExperimentConfig cfg = small_config();
  const auto res = run_experiment(cfg);
  const auto dir = scratch("manifest");
  write_experiment_outputs(dir, cfg, res);
  const auto m = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  CHECK(m["seed"] == 2024);
  CHECK(m["replications"] == 6);
  CHECK(m["penalty"]["kappa"] == 0.08);
  CHECK(m["signal"]["name"] == "teeth-type");
  CHECK(m["segmenters"].size() == 3);
  CHECK(m["oracle_bound"]["violations"] == 0);
  CHECK(m.contains("stepsel_version"));
  const auto risk = read_text_file(dir / "risk.csv");
  CHECK_THAT(risk, ContainsSubstring("method,risk,uncertainty,replications\nES,"));
}

TEST_CASE("experiment config parsing") {
  const auto dir = scratch("config");
  save_signal(dir / "sig.json", builtin_signal("stairs-type"));
  const std::string text = R"({
    "format": "stepsel-experiment",
    "signal": "sig.json",
    "outliers": {"count": 3, "value": 20},
    "segmenters": [{"method": "kseg", "k_max": 10}, {"method": "pelt", "use_vst": true}],
    "kappa": 0.1,
    "replications": 7,
    "bins": {"lo": -3, "hi": 3},
    "xi": 4,
    "workers": 2,
    "seed": 17
  })";
  const auto cfg = parse_experiment_config(text, dir, std::nullopt);
  CHECK(cfg.signal.name == "stairs-type");
  REQUIRE(cfg.outliers.has_value());
  CHECK(cfg.outliers->count == 3);
  CHECK(cfg.segmenters.size() == 2);
  CHECK(cfg.penalty.kappa == 0.1);
  CHECK(cfg.replications == 7);
  CHECK(cfg.bins.lo == -3);
  CHECK(cfg.xi == 4.0);
  CHECK(cfg.workers == 2);
  CHECK(cfg.seed == 17);
  CHECK(parse_experiment_config(text, dir, 99).seed == 99);

  const auto builtin = parse_experiment_config(
      R"({"signal": "fms-type", "segmenters": "default", "seed": 1})", dir, std::nullopt);
  CHECK(builtin.signal.n == 497);
  CHECK(builtin.segmenters.size() == 5);
  CHECK(builtin.replications == 1);

  CHECK_THROWS_AS(parse_experiment_config(R"({"signal": "fms-type"})", dir, std::nullopt),
                  ValidationError);
  CHECK_NOTHROW(parse_experiment_config(R"({"signal": "fms-type"})", dir, 3));
  CHECK_THROWS_AS(parse_experiment_config(R"({"signal": "nope", "seed": 1})", dir, std::nullopt),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_experiment_config(R"({"signal": "fms-type", "seed": 1, "replications": 0})", dir,
                              std::nullopt),
      ValidationError);
  CHECK_THROWS_AS(
      parse_experiment_config(R"({"signal": "fms-type", "seed": -1})", dir, std::nullopt),
      ParseError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"signal": "fms-type", "seed": 1,
    "segmenters": [{"method": "magic"}]})",
                                          dir, std::nullopt),
                  ParseError);
  CHECK_THROWS_AS(parse_experiment_config("{", dir, std::nullopt), ParseError);
}

TEST_CASE("a replication without candidates aborts the run") {
  ExperimentConfig cfg;
  cfg.signal = builtin_signal("teeth-type");
  cfg.segmenters = {{KSegDP{500}, false, true, {}}};
  cfg.seed = 1;
  CHECK_THROWS_AS(run_experiment(cfg), ComputationError);
}

TEST_CASE("kappa grid") {
  const auto g = kappa_grid(0.01, 0.30, 0.01);
  REQUIRE(g.size() == 30);
  CHECK(g.front() == 0.01);
  CHECK(g[6] == 0.07);
  CHECK(g.back() == 0.3);
  CHECK(kappa_grid(0.08, 0.08, 0.01) == std::vector<double>{0.08});
  CHECK_THROWS_AS(kappa_grid(0.0, 0.1, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(kappa_grid(0.2, 0.1, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(kappa_grid(0.1, 0.2, 0.0), std::invalid_argument);
}

TEST_CASE("calibration on a degenerate grid returns its only kappa") {
  CalibrationConfig cfg;
  cfg.settings = {builtin_signal("calib-gauss-N5")};
  cfg.kappas = {0.07};
  cfg.replications = 3;
  cfg.k_max = 10;
  cfg.seed = 4;
  const auto res = calibrate_kappa(cfg);
  REQUIRE(res.curves.size() == 1);
  CHECK(res.curves[0].argmin == 0);
  CHECK(res.recommended_kappa == 0.07);
  CHECK(res.bound.checks == 3);
  CHECK(res.bound.violations == 0);
}

TEST_CASE("calibration is deterministic across worker counts and reuses the data") {
  CalibrationConfig cfg;
  cfg.settings = {builtin_signal("calib-pois-N5"), builtin_signal("calib-exp-N5")};
  cfg.kappas = {0.02, 0.08, 0.3};
  cfg.replications = 4;
  cfg.k_max = 12;
  cfg.seed = 8;
  const auto a = calibrate_kappa(cfg);
  cfg.workers = 4;
  const auto b = calibrate_kappa(cfg);
  const auto da = scratch("cal_a");
  const auto db = scratch("cal_b");
  cfg.workers = 1;
  write_calibration_outputs(da, cfg, a);
  write_calibration_outputs(db, cfg, b);
  for (const char* f : {"calibration.csv", "calibration_argmin.csv", "manifest.json"}) {
    CHECK(read_text_file(da / f) == read_text_file(db / f));
  }
  REQUIRE(a.curves.size() == 2);
  CHECK(a.curves[0].setting == "calib-pois-N5");
  CHECK(a.curves[1].risk.size() == 3);
  for (const auto& c : a.curves) {
    const double best = *std::min_element(c.risk.begin(), c.risk.end());
    CHECK(c.risk[c.argmin] == best);
  }
  CHECK(std::find(cfg.kappas.begin(), cfg.kappas.end(), a.recommended_kappa) != cfg.kappas.end());
}

TEST_CASE("calibration config parsing") {
  const auto dir = scratch("cal_config");
  const auto cfg = parse_calibration_config(R"({
    "format": "stepsel-calibration",
    "settings": ["calib-gauss-N5", "calib-pois-N10"],
    "kappa_grid": {"from": 0.01, "to": 0.05, "step": 0.01},
    "replications": 9,
    "k_max": 20
  })",
                                            dir, 3);
  CHECK(cfg.settings.size() == 2);
  CHECK(cfg.kappas.size() == 5);
  CHECK(cfg.replications == 9);
  CHECK(cfg.k_max == 20);
  CHECK(cfg.seed == 3);
  const auto listed = parse_calibration_config(
      R"({"settings": ["calib-exp-N20"], "kappas": [0.1, 0.2], "seed": 5})", dir, std::nullopt);
  CHECK(listed.kappas == std::vector<double>{0.1, 0.2});
  CHECK_THROWS_AS(parse_calibration_config(R"({"settings": [], "kappas": [0.1], "seed": 1})",
                                           dir, std::nullopt),
                  ValidationError);
  CHECK_THROWS_AS(parse_calibration_config(R"({"settings": ["calib-exp-N20"], "seed": 1})", dir,
                                           std::nullopt),
                  ParseError);
  CHECK_THROWS_AS(parse_calibration_config(
                      R"({"settings": ["calib-exp-N20"], "kappas": [0.1], "k_max": 600,
                          "seed": 1})",
                      dir, std::nullopt),
                  ValidationError);
}
