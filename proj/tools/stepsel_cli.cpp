// stepsel: command-line driver for simulation, candidate generation,
// selection, replicated experiments and kappa calibration.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stepsel/errors.hpp"
#include "stepsel/experiment.hpp"
#include "stepsel/io.hpp"
#include "stepsel/segmenters.hpp"
#include "stepsel/selector.hpp"
#include "stepsel/simkit.hpp"

using namespace stepsel;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Built-in name, or a path to a signal file.
SignalSpec resolve_signal(const std::string& arg) {
  for (const auto& name : builtin_signal_names()) {
    if (name == arg) return builtin_signal(arg);
  }
  if (fs::exists(arg)) return load_signal(arg);
  throw ValidationError("signal '" + arg + "' is neither a builtin name nor an existing file");
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void print_diagnostics(const std::vector<std::string>& diags) {
  for (const auto& d : diags) std::cerr << "warning: " << d << "\n";
}

struct SimulateArgs {
  std::string signal;
  std::uint64_t seed = 0;
  std::size_t outlier_count = 0;
  double outlier_value = 0.0;
  std::string out;
  std::string truth_out;
};

int run_simulate(const SimulateArgs& a) {
  const SignalSpec spec = resolve_signal(a.signal);
  spec.validate();
  // Same stream layout as one experiment replication with index 0.
  Rng data = Rng::stream(a.seed, {0, 0});
  auto y = sample_series(spec, data);
  if (a.outlier_count > 0) {
    Rng out = Rng::stream(a.seed, {0, 1});
    y = inject_outliers(y, {a.outlier_count, a.outlier_value}, out).series;
  }
  write_series_csv(a.out, y);
  if (!a.truth_out.empty()) save_signal(a.truth_out, spec);
  std::cout << "wrote " << y.size() << " observations to " << a.out << "\n";
  return 0;
}

struct SegmentArgs {
  std::string data;
  std::string family;
  double sigma = 1.0;
  std::vector<std::string> specs;
  std::string specs_file;
  std::size_t kseg_k_max = 15;
  std::uint64_t seed = 0;
  std::string out;
};

int run_segment(const SegmentArgs& a) {
  const ExpFamily fam = ExpFamily::from_name(a.family, a.sigma);
  const Series series = read_series_csv(a.data);
  std::vector<SegmenterSpec> specs;
  for (const auto& s : a.specs) specs.push_back(parse_segmenter(s));
  if (!a.specs_file.empty()) {
    const json doc = read_json_file(a.specs_file);
    if (!doc.is_array()) throw ParseError(a.specs_file + ": expected an array of segmenter specs");
    for (const auto& s : doc) specs.push_back(parse_segmenter(s.dump()));
  }
  if (specs.empty()) specs = default_ensemble(a.kseg_k_max);
  const CandidateSet set = generate_candidates(fam, series.y, specs, a.seed);
  print_diagnostics(set.diagnostics);
  if (set.candidates.empty()) throw ComputationError("no generator produced a candidate");
  export_candidates(a.out, fam, set.candidates);
  std::cout << "wrote " << set.candidates.size() << " candidates (" << set.outputs.size()
            << " generator outputs) to " << a.out << "\n";
  return 0;
}

struct SelectArgs {
  std::string data;
  std::string candidates;
  double kappa = 0.08;
  double alpha = 1.0;
  std::string out;
};

int run_select(const SelectArgs& a) {
  const CandidateFile file = import_candidates(a.candidates);
  print_diagnostics(file.warnings);
  const Series series = read_series_csv(a.data);
  if (series.y.size() != file.n) {
    throw ValidationError("data has " + std::to_string(series.y.size()) +
                          " observations but the candidates have n = " + std::to_string(file.n));
  }
  PenaltyConfig pen{a.kappa, a.alpha};
  pen.validate();
  const SelectionResult res = select(file.family, series.y, file.candidates, pen);

  json report;
  report["format"] = "stepsel-selection";
  report["version"] = 1;
  report["family"] = file.family.name();
  report["n"] = file.n;
  report["kappa"] = pen.kappa;
  report["alpha"] = pen.alpha;
  report["chosen"] = res.chosen;
  report["chosen_label"] = file.candidates[res.chosen].label();
  report["ties"] = res.ties;
  json rows = json::array();
  for (std::size_t i = 0; i < file.candidates.size(); ++i) {
    rows.push_back({{"label", file.candidates[i].label()},
                    {"segments", file.candidates[i].segment_count()},
                    {"penalty", res.penalties[i]},
                    {"upsilon", res.upsilon[i]}});
  }
  report["candidates"] = rows;
  const std::string text = report.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
    std::cout << "selected " << file.candidates[res.chosen].label() << " ("
              << file.candidates[res.chosen].segment_count() << " segments); report in " << a.out
              << "\n";
  }
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<std::size_t> replications;
  std::optional<double> kappa;
  std::optional<std::size_t> workers;
  std::optional<std::string> signal;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  json doc = read_json_file(a.config);
  if (a.replications) doc["replications"] = *a.replications;
  if (a.kappa) doc["kappa"] = *a.kappa;
  if (a.workers) doc["workers"] = *a.workers;
  if (a.signal) doc["signal"] = *a.signal;
  const fs::path base = fs::absolute(a.config).parent_path();
  const ExperimentConfig cfg = parse_experiment_config(doc.dump(), base, a.seed);
  const ExperimentResult res = run_experiment(cfg);
  print_diagnostics(res.diagnostics);
  write_experiment_outputs(a.out, cfg, res);
  const auto& es = res.report.risk_of("ES");
  std::printf("ES risk %.4f +/- %.4f over %zu replications; oracle bound violations %zu; outputs in %s\n",
              es.risk, es.uncertainty, es.replications, res.bound.violations, a.out.c_str());
  return 0;
}

struct CalibrateArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<std::size_t> replications;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> k_max;
};

int run_calibrate_cmd(const CalibrateArgs& a) {
  json doc = read_json_file(a.config);
  if (a.replications) doc["replications"] = *a.replications;
  if (a.workers) doc["workers"] = *a.workers;
  if (a.k_max) doc["k_max"] = *a.k_max;
  const fs::path base = fs::absolute(a.config).parent_path();
  const CalibrationConfig cfg = parse_calibration_config(doc.dump(), base, a.seed);
  const CalibrationResult res = calibrate_kappa(cfg);
  write_calibration_outputs(a.out, cfg, res);
  for (const auto& c : res.curves) {
    std::printf("%-16s argmin kappa %.4g\n", c.setting.c_str(), res.kappas[c.argmin]);
  }
  std::printf("recommended kappa %.4g; oracle bound violations %zu; outputs in %s\n",
              res.recommended_kappa, res.bound.violations, a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimator selection for piecewise-constant exponential-family signals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", STEPSEL_VERSION);

  std::string names;
  for (const auto& n : builtin_signal_names()) names += (names.empty() ? "" : ", ") + n;

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw one series from a signal and write it as CSV");
  simulate->add_option("--signal", sim.signal, "Builtin signal name or signal JSON file; builtins: " + names)
      ->required();
  simulate->add_option("--seed", sim.seed, "Base seed (stream (seed, 0, 0), as replication 0)")->required();
  simulate->add_option("--outliers", sim.outlier_count, "Number of observations replaced by outliers");
  simulate->add_option("--outlier-value", sim.outlier_value, "Value written at outlier positions");
  simulate->add_option("-o,--out", sim.out, "Output series CSV (header y)")->required();
  simulate->add_option("--truth", sim.truth_out, "Also write the signal as a JSON signal file");

  SegmentArgs seg;
  auto* segment = app.add_subcommand("segment", "Run candidate generators on a series and write a candidate file");
  segment->add_option("--data", seg.data, "Series CSV with header y or w,y")->required()->check(CLI::ExistingFile);
  segment->add_option("--family", seg.family, "gaussian, poisson, exponential or bernoulli")->required();
  segment->add_option("--sigma", seg.sigma, "Noise standard deviation for the gaussian family");
  segment->add_option("--spec", seg.specs,
                      "Segmenter spec as a JSON object, repeatable, e.g. "
                      "'{\"method\": \"pelt\", \"use_vst\": true}'");
  segment->add_option("--specs", seg.specs_file, "JSON file holding an array of segmenter specs")
      ->check(CLI::ExistingFile);
  segment->add_option("--kseg-k-max", seg.kseg_k_max, "k_max of the default ensemble's k-segment DP");
  segment->add_option("--seed", seg.seed, "Seed for randomized generators (WBS)");
  segment->add_option("-o,--out", seg.out, "Output candidate file (JSON)")->required();
  segment->footer("Without --spec/--specs the default ensemble is used.");

  SelectArgs sel;
  auto* selectc = app.add_subcommand("select", "Select among candidates by the penalized pairwise score");
  selectc->add_option("--data", sel.data, "Series CSV the candidates were fitted on")->required()->check(CLI::ExistingFile);
  selectc->add_option("--candidates", sel.candidates, "Candidate file (JSON)")->required()->check(CLI::ExistingFile);
  selectc->add_option("--kappa", sel.kappa, "Penalty multiplier")->capture_default_str();
  selectc->add_option("--alpha", sel.alpha, "Refinement constant (>= 1)")->capture_default_str();
  selectc->add_option("-o,--out", sel.out, "Write the selection report here instead of stdout");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Replicated selection experiment");
  experiment->add_option("--config", exp.config, "Experiment config (JSON, format stepsel-experiment)")
      ->required()->check(CLI::ExistingFile);
  experiment->add_option("--seed", exp.seed, "Base seed; overrides the config")->required();
  experiment->add_option("-o,--out", exp.out, "Output directory")->required();
  experiment->add_option("--replications", exp.replications, "Override replications");
  experiment->add_option("--kappa", exp.kappa, "Override kappa");
  experiment->add_option("--workers", exp.workers, "Override worker threads");
  experiment->add_option("--signal", exp.signal, "Override the signal (builtin name or file)");
  experiment->footer("Writes risk.csv, freq.csv, contribution.csv, table.csv and manifest.json.");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Risk as a function of kappa over calibration settings");
  calibrate->add_option("--config", cal.config, "Calibration config (JSON, format stepsel-calibration)")
      ->required()->check(CLI::ExistingFile);
  calibrate->add_option("--seed", cal.seed, "Base seed; overrides the config")->required();
  calibrate->add_option("-o,--out", cal.out, "Output directory")->required();
  calibrate->add_option("--replications", cal.replications, "Override replications per setting");
  calibrate->add_option("--workers", cal.workers, "Override worker threads");
  calibrate->add_option("--k-max", cal.k_max, "Override the largest segment count of the candidates");
  calibrate->footer("Writes calibration.csv, calibration_argmin.csv and manifest.json.");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (segment->parsed()) return run_segment(seg);
    if (selectc->parsed()) return run_select(sel);
    if (experiment->parsed()) return run_experiment_cmd(exp);
    if (calibrate->parsed()) return run_calibrate_cmd(cal);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const ComputationError& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
