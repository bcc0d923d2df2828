#pragma once

// Losses and replication summaries.

#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stepsel/expfam.hpp"
#include "stepsel/selector.hpp"
#include "stepsel/simkit.hpp"
#include "stepsel/stepfn.hpp"

namespace stepsel {

/// sum_i h^2(R_{truth(i)}, R_{estimate(i)}), in [0, n].
double pseudo_hellinger_risk(const ExpFamily& fam, const StepFn& truth, const StepFn& estimate);
double pseudo_hellinger_risk(const SignalSpec& truth, const StepFn& estimate);

/// Outcome of one method in one replication.
struct MethodOutcome {
  std::string method;
  double loss = 0.0;
  /// Segment count of the method's estimate.
  std::size_t segments = 0;
};

struct ReplicationRecord {
  std::size_t index = 0;
  std::size_t true_segments = 0;
  std::vector<MethodOutcome> methods;
  /// Generator of the candidate chosen by the selection procedure; empty if
  /// the record carries no selection.
  std::string selected_generator;
};

/// Bins for N-hat - N: "<=lo", lo+1, ..., hi-1, ">=hi".
struct FreqBins {
  int lo = -2;
  int hi = 2;
  std::size_t count() const { return static_cast<std::size_t>(hi - lo + 1); }
  std::size_t bin_of(long long diff) const;
  std::vector<std::string> labels() const;
};

struct RiskRow {
  std::string method;
  double risk = 0.0;
  double uncertainty = 0.0;
  std::size_t replications = 0;
  /// Fewer than two replications: uncertainty is 0 by convention.
  bool low_sample = false;
};

struct FreqRow {
  std::string method;
  std::vector<double> freq;
};

struct ContributionRow {
  std::string generator;
  double freq = 0.0;
  std::size_t count = 0;
};

struct AggregateReport {
  std::size_t replications = 0;
  FreqBins bins;
  /// Rows ordered by the earliest position of the method inside a record,
  /// then by label, so the order does not depend on record order.
  std::vector<RiskRow> risk;
  std::vector<FreqRow> freq;
  std::vector<ContributionRow> contribution;

  const RiskRow& risk_of(const std::string& method) const;
  const FreqRow& freq_of(const std::string& method) const;
  /// 0 for generators that were never selected.
  double contribution_of(const std::string& generator) const;
};

/// Order-independent fold over replication records. Partial aggregates
/// merge exactly: merge(a, b).finish() == aggregate of both record sets.
class Aggregator {
 public:
  explicit Aggregator(FreqBins bins = {}) : bins_(bins) {}

  /// Throws std::invalid_argument on an empty record, a duplicated method
  /// label within a record or a negative/non-finite loss.
  void add(const ReplicationRecord& record);
  void merge(const Aggregator& other);
  std::size_t replications() const { return replications_; }
  /// Throws std::invalid_argument if no record was added.
  AggregateReport finish() const;

 private:
  struct MethodState {
    std::vector<double> losses;
    std::vector<std::size_t> bin_counts;
  };
  FreqBins bins_;
  std::size_t replications_ = 0;
  std::map<std::string, MethodState> methods_;
  /// Method label -> rank of its first appearance inside a record.
  std::map<std::string, std::size_t> rank_;
  std::map<std::string, std::size_t> contributions_;
};

AggregateReport aggregate(std::span<const ReplicationRecord> records, FreqBins bins = {});

struct OracleBound {
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  /// rhs - lhs.
  double margin = 0.0;
};

inline constexpr double kOracleC1 = 91.4;
inline constexpr double kOracleC2 = 42.7;
inline constexpr double kOracleC3 = 12666.9;

/// Checks
///   h^2(truth, chosen) <= min_l [c1 h^2(truth, g_l) + c2 pen(g_l)] + c3 (1.471 + xi).
OracleBound oracle_bound_check(const ExpFamily& fam, const StepFn& truth,
                               std::span<const StepFn> candidates, std::size_t chosen,
                               const PenaltyConfig& cfg, double xi);

void write_risk_csv(std::ostream& os, const AggregateReport& report);
void write_freq_csv(std::ostream& os, const AggregateReport& report);
void write_contribution_csv(std::ostream& os, const AggregateReport& report);
/// Risk, uncertainty, N-hat - N bins and contribution in one row per method.
void write_table_csv(std::ostream& os, const AggregateReport& report);

}  // namespace stepsel
