#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stepsel/expfam.hpp"

namespace stepsel {

/// Partition of the index grid 1..n into consecutive segments.
///
/// A changepoint is the 1-based index of the first observation of a new
/// segment, so changepoints lie in 2..n and are strictly increasing. Index i
/// corresponds to the covariate (i - 1) / n.
class Partition {
 public:
  /// Single segment covering 1..n.
  explicit Partition(std::size_t n);
  Partition(std::size_t n, std::vector<std::size_t> changepoints);

  std::size_t n() const { return n_; }
  const std::vector<std::size_t>& changepoints() const { return cps_; }
  std::size_t segment_count() const { return cps_.size() + 1; }

  /// First and last index (1-based, inclusive) of segment s (0-based).
  std::size_t segment_begin(std::size_t s) const;
  std::size_t segment_end(std::size_t s) const;
  std::size_t segment_length(std::size_t s) const {
    return segment_end(s) - segment_begin(s) + 1;
  }
  /// 0-based segment holding index i (1-based).
  std::size_t segment_of(std::size_t i) const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::size_t n_;
  std::vector<std::size_t> cps_;
};

/// Piecewise-constant candidate: a partition with one parameter per segment.
class StepFn {
 public:
  StepFn(Partition partition, std::vector<double> values, std::string label = {});

  const Partition& partition() const { return partition_; }
  const std::vector<double>& values() const { return values_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  std::size_t n() const { return partition_.n(); }
  std::size_t segment_count() const { return partition_.segment_count(); }

  /// Value at index i (1-based); segments start at their changepoint.
  double eval_at(std::size_t i) const;
  /// Values at 1..n as a dense vector (element t holds index t + 1).
  std::vector<double> dense() const;

  /// Throws std::domain_error if a value is outside the family's interval.
  void validate(const ExpFamily& fam) const;

  /// Same partition and bitwise-equal values; labels are ignored.
  bool same_function(const StepFn& other) const;

 private:
  Partition partition_;
  std::vector<double> values_;
  std::string label_;
};

/// Common refinement: the union of both changepoint sets.
Partition refine(const Partition& a, const Partition& b);

/// log C(n, k). Exact integer evaluation for n <= 60, log-gamma beyond.
double log_binomial(std::size_t n, std::size_t k);

/// Weight of a partition with k segments of 1..n:
/// log C(n - 1, k - 1) + k.
double delta_weight(std::size_t n, std::size_t k);

/// Complexity k * (9.11 + log+(n / k)).
double dn_complexity(std::size_t n, std::size_t k);

}  // namespace stepsel
