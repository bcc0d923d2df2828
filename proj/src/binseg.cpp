#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include "stepsel/segmenters.hpp"

namespace stepsel {

namespace {

std::vector<double> prefix_sums(std::span<const double> y) {
  std::vector<double> cum(y.size() + 1, 0.0);
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (!std::isfinite(y[t])) throw std::domain_error("segmentation: non-finite observation");
    cum[t + 1] = cum[t] + y[t];
  }
  return cum;
}

struct Split {
  std::size_t b = 0;  // last index of the left part
  double magnitude = -1.0;
};

// Best split of s..e by |CUSUM|; first maximizer wins.
Split best_split(std::span<const double> cum, std::size_t s, std::size_t e, double sigma) {
  Split best;
  for (std::size_t b = s; b < e; ++b) {
    const double v = std::abs(cusum(cum, s, b, e, sigma));
    if (v > best.magnitude) {
      best.magnitude = v;
      best.b = b;
    }
  }
  return best;
}

StepFn mean_fit(std::span<const double> cum, std::size_t n, std::vector<std::size_t> cps,
                std::string label) {
  Partition partition(n, std::move(cps));
  std::vector<double> values;
  for (std::size_t s = 0; s < partition.segment_count(); ++s) {
    const std::size_t i = partition.segment_begin(s);
    const std::size_t j = partition.segment_end(s);
    values.push_back((cum[j] - cum[i - 1]) / static_cast<double>(j - i + 1));
  }
  return StepFn(std::move(partition), std::move(values), std::move(label));
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("segmentation: sigma must be positive");
  }
}

}  // namespace

double cusum(std::span<const double> cum, std::size_t s, std::size_t b, std::size_t e,
             double sigma) {
  const double len = static_cast<double>(e - s + 1);
  const double left = static_cast<double>(b - s + 1);
  const double right = static_cast<double>(e - b);
  const double sum_left = cum[b] - cum[s - 1];
  const double sum_right = cum[e] - cum[b];
  return (std::sqrt(right / (len * left)) * sum_left -
          std::sqrt(left / (len * right)) * sum_right) /
         sigma;
}

std::vector<StepFn> binary_segmentation(std::span<const double> y, double sigma,
                                        std::size_t k_max) {
  const std::size_t n = y.size();
  if (n < 2) throw std::invalid_argument("binary_segmentation: need at least 2 points");
  if (k_max < 1) throw std::invalid_argument("binary_segmentation: k_max must be >= 1");
  check_sigma(sigma);
  const auto cum = prefix_sums(y);

  struct Segment {
    std::size_t s, e;
    Split split;
  };
  std::vector<Segment> segments{{1, n, best_split(cum, 1, n, sigma)}};
  std::vector<std::size_t> cps;
  std::vector<StepFn> path{mean_fit(cum, n, cps, "binseg/k=1")};

  while (path.size() < k_max) {
    std::size_t pick = segments.size();
    double top = -1.0;
    for (std::size_t q = 0; q < segments.size(); ++q) {
      if (segments[q].e > segments[q].s && segments[q].split.magnitude > top) {
        top = segments[q].split.magnitude;
        pick = q;
      }
    }
    if (pick == segments.size()) break;
    const Segment seg = segments[pick];
    const std::size_t b = seg.split.b;
    segments[pick] = {seg.s, b, seg.s < b ? best_split(cum, seg.s, b, sigma) : Split{}};
    segments.push_back({b + 1, seg.e, b + 1 < seg.e ? best_split(cum, b + 1, seg.e, sigma)
                                                    : Split{}});
    cps.insert(std::upper_bound(cps.begin(), cps.end(), b + 1), b + 1);
    path.push_back(mean_fit(cum, n, cps, "binseg/k=" + std::to_string(path.size() + 1)));
  }
  return path;
}

StepFn wbs_ssic(std::span<const double> y, double sigma, const WbsOptions& opts, Rng& rng) {
  const std::size_t n = y.size();
  if (n < 2) throw std::invalid_argument("wbs: need at least 2 points");
  if (opts.intervals < 1) throw std::invalid_argument("wbs: need at least one interval");
  check_sigma(sigma);
  const auto cum = prefix_sums(y);

  struct Interval {
    std::size_t s, e;
  };
  std::vector<Interval> intervals;
  intervals.reserve(opts.intervals);
  while (intervals.size() < opts.intervals) {
    std::size_t s = 1 + rng.uniform_int(n);
    std::size_t e = 1 + rng.uniform_int(n);
    if (s == e) continue;
    if (s > e) std::swap(s, e);
    intervals.push_back({s, e});
  }

  // Best split inside every random interval, computed once.
  std::vector<Split> interval_best;
  interval_best.reserve(intervals.size());
  for (const auto& iv : intervals) interval_best.push_back(best_split(cum, iv.s, iv.e, sigma));

  // Solution path, explored best-first. A split's level is the smallest
  // CUSUM magnitude along its ancestry, so levels never increase with depth
  // and the first detections popped are the top of the path.
  struct Work {
    std::size_t s, e, b;
    double level;
    std::size_t order;
  };
  auto lower = [](const Work& x, const Work& z) {
    return x.level < z.level || (x.level == z.level && x.order > z.order);
  };
  std::priority_queue<Work, std::vector<Work>, decltype(lower)> queue(lower);
  std::size_t order = 0;
  auto push = [&](std::size_t s, std::size_t e, double cap) {
    if (e <= s) return;
    Split best = best_split(cum, s, e, sigma);
    for (std::size_t q = 0; q < intervals.size(); ++q) {
      if (intervals[q].s < s || intervals[q].e > e) continue;
      if (interval_best[q].magnitude > best.magnitude) best = interval_best[q];
    }
    // Zero CUSUM everywhere: the stretch is constant.
    if (!(best.magnitude > 1e-12)) return;
    queue.push({s, e, best.b, std::min(cap, best.magnitude), order++});
  };
  push(1, n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> detected;
  while (!queue.empty() && detected.size() < opts.max_changepoints) {
    const Work w = queue.top();
    queue.pop();
    detected.push_back(w.b + 1);
    push(w.s, w.b, w.level);
    push(w.b + 1, w.e, w.level);
  }

  const std::size_t kmax = detected.size();
  const double nd = static_cast<double>(n);
  const double per_cp = std::pow(std::log(nd), opts.ssic_alpha);

  std::vector<std::size_t> best_cps;
  double best_ic = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> cps;
  for (std::size_t k = 0; k <= kmax; ++k) {
    if (k > 0) {
      const std::size_t cp = detected[k - 1];
      cps.insert(std::upper_bound(cps.begin(), cps.end(), cp), cp);
    }
    double rss = 0.0;
    std::size_t start = 1;
    for (std::size_t q = 0; q <= cps.size(); ++q) {
      const std::size_t end = q < cps.size() ? cps[q] - 1 : n;
      const double mean = (cum[end] - cum[start - 1]) / static_cast<double>(end - start + 1);
      for (std::size_t t = start; t <= end; ++t) {
        const double d = y[t - 1] - mean;
        rss += d * d;
      }
      start = end + 1;
    }
    const double floor = std::numeric_limits<double>::min();
    const double ic = 0.5 * nd * std::log(std::max(rss, floor) / nd) +
                      static_cast<double>(k) * per_cp;
    if (ic < best_ic) {
      best_ic = ic;
      best_cps = cps;
    }
  }
  return mean_fit(cum, n, std::move(best_cps), "wbs-ssic");
}

}  // namespace stepsel
