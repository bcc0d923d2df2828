#pragma once

// File formats: candidate files, signal files, segmenter specs and series CSV.
// The JSON layouts are documented in docs/formats.md.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stepsel/expfam.hpp"
#include "stepsel/segmenters.hpp"
#include "stepsel/simkit.hpp"
#include "stepsel/stepfn.hpp"

namespace stepsel {

struct CandidateFile {
  ExpFamily family = ExpFamily::poisson();
  std::size_t n = 0;
  std::vector<StepFn> candidates;
  /// Non-fatal findings, e.g. equal values on both sides of a changepoint.
  std::vector<std::string> warnings;
};

/// Throws ParseError (malformed JSON or wrong field types; the message
/// carries line/column or the record index) or ValidationError (content
/// violating an invariant; the message names the record).
CandidateFile parse_candidates(const std::string& text);
std::string dump_candidates(const ExpFamily& fam, std::span<const StepFn> candidates);
CandidateFile import_candidates(const std::filesystem::path& path);
void export_candidates(const std::filesystem::path& path, const ExpFamily& fam,
                       std::span<const StepFn> candidates);

SignalSpec parse_signal(const std::string& text);
std::string dump_signal(const SignalSpec& spec);
SignalSpec load_signal(const std::filesystem::path& path);
void save_signal(const std::filesystem::path& path, const SignalSpec& spec);

/// One segmenter spec as a JSON object, e.g.
/// {"method": "robust", "loss": "biweight", "c": 4.685, "use_vst": true}.
SegmenterSpec parse_segmenter(const std::string& json_object);
std::string dump_segmenter(const SegmenterSpec& spec);

struct Series {
  std::vector<double> y;
  /// Covariates when the file has a "w,y" header.
  std::optional<std::vector<double>> w;
};

/// CSV with header "y" or "w,y" and one observation per line.
Series parse_series_csv(const std::string& text);
Series read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, std::span<const double> y);

/// Whole file as a string; throws std::runtime_error naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace stepsel
