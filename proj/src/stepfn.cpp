#include "stepsel/stepfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <stdexcept>

namespace stepsel {

Partition::Partition(std::size_t n) : Partition(n, {}) {}

Partition::Partition(std::size_t n, std::vector<std::size_t> changepoints)
    : n_(n), cps_(std::move(changepoints)) {
  if (n_ == 0) {
    throw std::invalid_argument("partition: n must be positive");
  }
  for (std::size_t s = 0; s < cps_.size(); ++s) {
    if (cps_[s] < 2 || cps_[s] > n_) {
      throw std::invalid_argument("partition: changepoint " + std::to_string(cps_[s]) +
                                  " outside 2.." + std::to_string(n_));
    }
    if (s > 0 && cps_[s] <= cps_[s - 1]) {
      throw std::invalid_argument("partition: changepoints must be strictly increasing");
    }
  }
}

std::size_t Partition::segment_begin(std::size_t s) const {
  if (s >= segment_count()) throw std::out_of_range("partition: segment index");
  return s == 0 ? 1 : cps_[s - 1];
}

std::size_t Partition::segment_end(std::size_t s) const {
  if (s >= segment_count()) throw std::out_of_range("partition: segment index");
  return s == cps_.size() ? n_ : cps_[s] - 1;
}

std::size_t Partition::segment_of(std::size_t i) const {
  if (i < 1 || i > n_) {
    throw std::out_of_range("partition: index " + std::to_string(i) + " outside 1.." +
                            std::to_string(n_));
  }
  return static_cast<std::size_t>(std::upper_bound(cps_.begin(), cps_.end(), i) - cps_.begin());
}

StepFn::StepFn(Partition partition, std::vector<double> values, std::string label)
    : partition_(std::move(partition)), values_(std::move(values)), label_(std::move(label)) {
  if (values_.size() != partition_.segment_count()) {
    throw std::invalid_argument("step function: " + std::to_string(values_.size()) +
                                " values for " + std::to_string(partition_.segment_count()) +
                                " segments");
  }
}

double StepFn::eval_at(std::size_t i) const {
  return values_[partition_.segment_of(i)];
}

std::vector<double> StepFn::dense() const {
  std::vector<double> out;
  out.reserve(n());
  for (std::size_t s = 0; s < segment_count(); ++s) {
    out.insert(out.end(), partition_.segment_length(s), values_[s]);
  }
  return out;
}

void StepFn::validate(const ExpFamily& fam) const {
  for (double v : values_) fam.require_domain(v);
}

bool StepFn::same_function(const StepFn& other) const {
  return partition_ == other.partition_ && values_ == other.values_;
}

Partition refine(const Partition& a, const Partition& b) {
  if (a.n() != b.n()) {
    throw std::invalid_argument("refine: partitions over different lengths");
  }
  std::vector<std::size_t> merged;
  merged.reserve(a.changepoints().size() + b.changepoints().size());
  std::set_union(a.changepoints().begin(), a.changepoints().end(), b.changepoints().begin(),
                 b.changepoints().end(), std::back_inserter(merged));
  return Partition(a.n(), std::move(merged));
}

double log_binomial(std::size_t n, std::size_t k) {
  if (k > n) {
    throw std::invalid_argument("log_binomial: k > n");
  }
  k = std::min(k, n - k);
  if (n <= 60) {
    // C(n, k) <= C(60, 30) < 2^64; the running product stays integral.
    std::uint64_t c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
      c = c * (n - k + i) / i;
    }
    return std::log(static_cast<double>(c));
  }
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

namespace {

void check_segments(std::size_t n, std::size_t k) {
  if (k < 1 || k > n) {
    throw std::invalid_argument("segment count " + std::to_string(k) + " outside 1.." +
                                std::to_string(n));
  }
}

}  // namespace

double delta_weight(std::size_t n, std::size_t k) {
  check_segments(n, k);
  return log_binomial(n - 1, k - 1) + static_cast<double>(k);
}

double dn_complexity(std::size_t n, std::size_t k) {
  check_segments(n, k);
  const double kd = static_cast<double>(k);
  return kd * (9.11 + std::max(std::log(static_cast<double>(n) / kd), 0.0));
}

}  // namespace stepsel
