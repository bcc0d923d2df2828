#include <limits>
#include <stdexcept>
#include <string>

#include "penalized_core.hpp"
#include "stepsel/segmenters.hpp"

namespace stepsel {

namespace {

StepFn mle_fit(const ExpFamily& fam, const SufficientPrefix& prefix, Partition partition,
               std::string label) {
  std::vector<double> values;
  values.reserve(partition.segment_count());
  for (std::size_t s = 0; s < partition.segment_count(); ++s) {
    values.push_back(
        segment_mle(fam, prefix, partition.segment_begin(s), partition.segment_end(s)));
  }
  return StepFn(std::move(partition), std::move(values), std::move(label));
}

}  // namespace

double partition_cost(const ExpFamily& fam, const SufficientPrefix& prefix,
                      const Partition& partition) {
  double total = 0.0;
  for (std::size_t s = 0; s < partition.segment_count(); ++s) {
    total += segment_cost(fam, prefix, partition.segment_begin(s), partition.segment_end(s));
  }
  return total;
}

DpPath k_segment_dp(const ExpFamily& fam, std::span<const double> y, std::size_t k_max) {
  const std::size_t n = y.size();
  if (n == 0) {
    throw std::invalid_argument("k_segment_dp: empty series");
  }
  if (k_max < 1 || k_max > n) {
    throw std::invalid_argument("k_segment_dp: k_max " + std::to_string(k_max) +
                                " outside 1.." + std::to_string(n));
  }
  const SufficientPrefix prefix(fam, y);
  constexpr double inf = std::numeric_limits<double>::infinity();

  // best[k][j]: minimal cost of 1..j in k+1 segments; from[k][j]: start of
  // the last segment.
  std::vector<std::vector<double>> best(k_max, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> from(k_max, std::vector<std::size_t>(n + 1, 0));
  std::vector<double> seg(n + 1);
  for (std::size_t j = 1; j <= n; ++j) {
    // seg[i] = cost(i, j); shared across all k for this j.
    for (std::size_t i = 1; i <= j; ++i) seg[i] = segment_cost(fam, prefix, i, j);
    best[0][j] = seg[1];
    from[0][j] = 1;
    const std::size_t top = std::min(k_max, j);
    for (std::size_t k = 1; k < top; ++k) {
      double b = inf;
      std::size_t arg = 0;
      // Last segment starts at i + 1 with i >= k points before it.
      for (std::size_t i = k; i < j; ++i) {
        const double v = best[k - 1][i] + seg[i + 1];
        if (v < b) {
          b = v;
          arg = i + 1;
        }
      }
      best[k][j] = b;
      from[k][j] = arg;
    }
  }

  DpPath path;
  for (std::size_t k = 0; k < k_max; ++k) {
    std::vector<std::size_t> cps(k);
    std::size_t end = n;
    for (std::size_t level = k; level > 0; --level) {
      const std::size_t start = from[level][end];
      cps[level - 1] = start;
      end = start - 1;
    }
    path.fits.push_back(
        mle_fit(fam, prefix, Partition(n, std::move(cps)), "kseg/k=" + std::to_string(k + 1)));
    path.costs.push_back(best[k][n]);
  }
  return path;
}

PenalizedFit pelt(const ExpFamily& fam, std::span<const double> y, double beta) {
  const std::size_t n = y.size();
  if (n == 0) {
    throw std::invalid_argument("pelt: empty series");
  }
  if (!(beta >= 0.0)) {
    throw std::invalid_argument("pelt: beta must be nonnegative");
  }
  const SufficientPrefix prefix(fam, y);
  const bool prune = fam.kind() != FamilyKind::Bernoulli;
  auto path = detail::penalized_partition(
      n, beta, [&](std::size_t i, std::size_t j) { return segment_cost(fam, prefix, i, j); },
      prune);
  Partition partition(n, std::move(path.changepoints));
  const double cost = partition_cost(fam, prefix, partition);
  return {mle_fit(fam, prefix, std::move(partition), "pelt"), cost, path.objective};
}

}  // namespace stepsel
