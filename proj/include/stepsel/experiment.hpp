#pragma once

// Monte-Carlo drivers: replicated selection experiments and kappa
// calibration.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stepsel/evalkit.hpp"
#include "stepsel/segmenters.hpp"
#include "stepsel/selector.hpp"
#include "stepsel/simkit.hpp"

namespace stepsel {

struct ExperimentConfig {
  SignalSpec signal;
  std::optional<OutlierSpec> outliers;
  std::vector<SegmenterSpec> segmenters = default_ensemble();
  PenaltyConfig penalty;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  FreqBins bins;
  /// Tail parameter of the oracle-bound check.
  double xi = 5.0;
  /// Worker threads; results do not depend on it.
  std::size_t workers = 1;

  void validate() const;
};

/// Builds a config from JSON text (format "stepsel-experiment"). Relative
/// signal file paths resolve against base_dir. The seed must be present
/// unless seed_override is given.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir,
                                         std::optional<std::uint64_t> seed_override);

struct BoundSummary {
  std::size_t checks = 0;
  std::size_t violations = 0;
  double min_margin = 0.0;
};

struct ExperimentResult {
  AggregateReport report;
  std::vector<ReplicationRecord> records;
  /// Generator failures and warnings, prefixed with the replication index.
  std::vector<std::string> diagnostics;
  BoundSummary bound;
};

/// Per replication r: sample the signal from stream (seed, r, 0), inject
/// outliers from (seed, r, 1), generate candidates, select, score. Method
/// rows are "ES" plus every generator output before deduplication. Throws
/// ComputationError if a replication yields no candidate.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes risk.csv, freq.csv, contribution.csv, table.csv and manifest.json.
void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                              const ExperimentResult& result);

struct CalibrationConfig {
  std::vector<SignalSpec> settings;
  std::vector<double> kappas;
  std::size_t replications = 50;
  std::size_t k_max = 30;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  double xi = 5.0;
  std::size_t workers = 1;

  void validate() const;
};

/// Config from JSON text (format "stepsel-calibration").
CalibrationConfig parse_calibration_config(const std::string& text,
                                           const std::filesystem::path& base_dir,
                                           std::optional<std::uint64_t> seed_override);

/// from, from + step, ..., up to `to` (inclusive up to rounding).
std::vector<double> kappa_grid(double from, double to, double step);

struct CalibrationCurve {
  std::string setting;
  std::vector<double> risk;
  std::vector<double> uncertainty;
  /// Index of the smallest risk; the smallest kappa wins ties.
  std::size_t argmin = 0;
};

struct CalibrationResult {
  std::vector<double> kappas;
  std::vector<CalibrationCurve> curves;
  /// Minimizer of the mean over settings of risk(kappa) / min risk.
  double recommended_kappa = 0.0;
  BoundSummary bound;
};

/// Candidates are the k-segment DP fits, k = 1..k_max; the T-matrix of
/// each replication is computed once and reused across the kappa grid.
CalibrationResult calibrate_kappa(const CalibrationConfig& cfg);

/// Writes calibration.csv (setting, kappa, risk, uncertainty),
/// calibration_argmin.csv and manifest.json.
void write_calibration_outputs(const std::filesystem::path& dir, const CalibrationConfig& cfg,
                               const CalibrationResult& result);

}  // namespace stepsel
