#pragma once

// Candidate generators.
//
// Every generator returns step functions over the original index grid. The
// exact dynamic programs work with any family's segment cost; the CUSUM and
// robust generators expect approximately Gaussian, unit-scale input and are
// normally run after vst_transform() and MAD standardization (see
// generate_candidates()).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stepsel/expfam.hpp"
#include "stepsel/rng.hpp"
#include "stepsel/stepfn.hpp"

namespace stepsel {

// ---------------------------------------------------------------------------
// Exact dynamic programs

/// Optimal k-segment fits for k = 1..k_max and their total costs.
struct DpPath {
  std::vector<StepFn> fits;
  std::vector<double> costs;
};

/// Sum of segment costs of a partition, accumulated left to right.
double partition_cost(const ExpFamily& fam, const SufficientPrefix& prefix,
                      const Partition& partition);

/// Segment-neighbourhood DP: for each k the partition into exactly k
/// segments with minimal total segment_cost. Values are per-segment MLEs.
DpPath k_segment_dp(const ExpFamily& fam, std::span<const double> y, std::size_t k_max);

struct PenalizedFit {
  StepFn fit;
  /// Sum of segment costs.
  double cost = 0.0;
  /// cost + beta * segment count.
  double objective = 0.0;
};

/// Optimal partitioning minimizing sum of segment costs + beta * segments,
/// with PELT pruning. Pruning is disabled for the Bernoulli family, whose
/// length-dependent clamp breaks the additivity the pruning rule needs.
PenalizedFit pelt(const ExpFamily& fam, std::span<const double> y, double beta);

// ---------------------------------------------------------------------------
// CUSUM-based segmentation (Gaussian scale)

/// CUSUM statistic of y_s..y_e (1-based, inclusive) for a split after b,
/// scaled by 1/sigma. Uses prefix sums `cum` with cum[0] = 0.
double cusum(std::span<const double> cum, std::size_t s, std::size_t b, std::size_t e,
             double sigma);

/// Greedy binary segmentation. Element k-1 holds the fit with k segments;
/// the path stops early once every segment is a single point.
std::vector<StepFn> binary_segmentation(std::span<const double> y, double sigma,
                                        std::size_t k_max);

struct WbsOptions {
  std::size_t intervals = 5000;
  double ssic_alpha = 1.01;
  /// Largest number of changepoints considered by sSIC.
  std::size_t max_changepoints = 50;
};

/// Wild binary segmentation with the strengthened Schwarz criterion
///   sSIC(k) = n/2 log(RSS_k / n) + k (log n)^alpha
/// over the nested models obtained by thresholding the solution path.
StepFn wbs_ssic(std::span<const double> y, double sigma, const WbsOptions& opts, Rng& rng);

// ---------------------------------------------------------------------------
// Robust penalized segmentation (standardized scale)

struct HuberLoss {
  double delta = 1.345;
};
/// Tukey's biweight.
struct BiweightLoss {
  double c = 4.685;
};
using RobustLoss = std::variant<HuberLoss, BiweightLoss>;

/// Loss value; both losses behave like r^2 / 2 near zero.
double robust_rho(const RobustLoss& loss, double r);

/// min over location c of sum rho(y_t - c), located by IRLS from the median.
/// Throws ComputationError after 200 iterations without reaching 1e-8.
struct RobustSegmentFit {
  double location = 0.0;
  double cost = 0.0;
};
RobustSegmentFit robust_segment_fit(const RobustLoss& loss, std::span<const double> y);

/// Penalized optimal partitioning with the robust segment cost.
PenalizedFit robust_penalized_dp(std::span<const double> y, const RobustLoss& loss,
                                 double beta);

// ---------------------------------------------------------------------------
// Preprocessing

/// Poisson: 2 sqrt(y + 1/4). Exponential: log(2 y). Gaussian: unchanged.
std::vector<double> vst_transform(const ExpFamily& fam, std::span<const double> y);

struct MadEstimate {
  double sigma = 0.0;
  /// All first differences were zero; sigma is the epsilon floor.
  bool degenerate = false;
};

/// median |y_{i+1} - y_i| / (0.6744897 sqrt 2).
MadEstimate mad_sigma(std::span<const double> y);

// ---------------------------------------------------------------------------
// Ensembles

struct KSegDP {
  std::size_t k_max = 30;
};
/// beta defaults to log n: the classical 2 log n per segment on the
/// deviance scale, halved because segment costs are negative
/// log-likelihoods (RSS / 2 for standardized Gaussian data).
struct Pelt {
  std::optional<double> beta;
};
struct BinSeg {
  std::size_t k_max = 20;
};
struct WbsSsic {
  std::size_t intervals = 5000;
  double ssic_alpha = 1.01;
};
/// beta defaults to log n as for Pelt.
struct RobustDP {
  RobustLoss loss = BiweightLoss{};
  std::optional<double> beta;
};

using SegmenterMethod = std::variant<KSegDP, Pelt, BinSeg, WbsSsic, RobustDP>;

struct SegmenterSpec {
  SegmenterMethod method;
  /// Run on vst_transform(y) instead of y.
  bool use_vst = false;
  /// Refit segment values by family MLE on the original data. Outputs of
  /// generators that do not work on the family's own scale are always refit.
  bool refit_mle = true;
  /// Empty: derived from the method, with "^t" appended when use_vst is set.
  std::string label;

  std::string effective_label() const;
  void validate() const;
};

/// The native ensemble used in the Poisson/exponential studies: k-segment DP
/// on the raw data followed by PELT, WBS-sSIC, biweight and Huber on the
/// transformed data, each refit by MLE. Order matters for deduplication:
/// identical fits are credited to the earliest generator.
std::vector<SegmenterSpec> default_ensemble(std::size_t kseg_k_max = 15);

struct GeneratorOutput {
  StepFn fit;
  std::size_t spec_index = 0;
};

struct CandidateSet {
  /// Deduplicated candidates in spec order; first occurrence wins.
  std::vector<StepFn> candidates;
  /// Every generator output before deduplication.
  std::vector<GeneratorOutput> outputs;
  /// One entry per failed spec.
  std::vector<std::string> diagnostics;
};

/// Runs every spec on y. Spec i draws from Rng::stream(seed, {i}). A failing
/// spec is skipped and reported in diagnostics.
CandidateSet generate_candidates(const ExpFamily& fam, std::span<const double> y,
                                 std::span<const SegmenterSpec> specs, std::uint64_t seed);

/// Generator name of a candidate label: the part before the first '/'.
std::string generator_of(const std::string& label);

}  // namespace stepsel
