#pragma once

// Optimal partitioning with optional PELT pruning, shared by the exact and
// robust penalized segmenters.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace stepsel::detail {

struct PenalizedPath {
  /// Changepoints (segment starts, 1-based).
  std::vector<std::size_t> changepoints;
  /// Sum of segment costs + beta * segment count.
  double objective = 0.0;
};

/// cost(i, j) is the cost of segment i..j (1-based, inclusive) and must
/// satisfy cost(a, b) + cost(b + 1, c) <= cost(a, c) when prune is set.
/// Among equal objectives the latest segment start is kept.
template <class CostFn>
PenalizedPath penalized_partition(std::size_t n, double beta, CostFn&& cost, bool prune) {
  std::vector<double> best(n + 1, 0.0);
  std::vector<std::size_t> last(n + 1, 0);
  std::vector<std::size_t> live{0};
  std::vector<double> vals;
  for (std::size_t t = 1; t <= n; ++t) {
    vals.resize(live.size());
    double min_val = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < live.size(); ++c) {
      const std::size_t s = live[c];
      vals[c] = best[s] + cost(s + 1, t);
      if (vals[c] + beta <= min_val) {
        min_val = vals[c] + beta;
        arg = s;
      }
    }
    best[t] = min_val;
    last[t] = arg;
    if (prune) {
      // Margin absorbs rounding in the additivity inequality.
      const double bound = best[t] + 1e-9 * (1.0 + std::abs(best[t]));
      std::size_t keep = 0;
      for (std::size_t c = 0; c < live.size(); ++c) {
        if (vals[c] <= bound) live[keep++] = live[c];
      }
      live.resize(keep);
    }
    live.push_back(t);
  }

  PenalizedPath path;
  for (std::size_t t = n; t > 0; t = last[t]) {
    if (last[t] > 0) path.changepoints.push_back(last[t] + 1);
  }
  std::vector<std::size_t> cps(path.changepoints.rbegin(), path.changepoints.rend());
  path.changepoints = std::move(cps);
  path.objective = best[n];
  return path;
}

}  // namespace stepsel::detail
