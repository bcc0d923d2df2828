#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "penalized_core.hpp"
#include "stepsel/errors.hpp"
#include "stepsel/segmenters.hpp"

namespace stepsel {

namespace {

constexpr double kIrlsTolerance = 1e-8;
constexpr int kIrlsMaxIter = 200;

// IRLS weight psi(r) / r.
double irls_weight(const RobustLoss& loss, double r) {
  if (const auto* h = std::get_if<HuberLoss>(&loss)) {
    const double a = std::abs(r);
    return a <= h->delta ? 1.0 : h->delta / a;
  }
  const double c = std::get<BiweightLoss>(loss).c;
  if (std::abs(r) >= c) return 0.0;
  const double q = 1.0 - (r / c) * (r / c);
  return q * q;
}

// Derivative of psi, the curvature of rho.
double psi_prime(const RobustLoss& loss, double r) {
  if (const auto* h = std::get_if<HuberLoss>(&loss)) return std::abs(r) <= h->delta ? 1.0 : 0.0;
  const double c = std::get<BiweightLoss>(loss).c;
  if (std::abs(r) >= c) return 0.0;
  const double q = (r / c) * (r / c);
  return (1.0 - q) * (1.0 - 5.0 * q);
}

void check_loss(const RobustLoss& loss) {
  const double scale = std::visit(
      [](const auto& l) {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, HuberLoss>) {
          return l.delta;
        } else {
          return l.c;
        }
      },
      loss);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("robust loss: scale constant must be positive");
  }
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace

double robust_rho(const RobustLoss& loss, double r) {
  if (const auto* h = std::get_if<HuberLoss>(&loss)) {
    const double a = std::abs(r);
    return a <= h->delta ? 0.5 * r * r : h->delta * a - 0.5 * h->delta * h->delta;
  }
  const double c = std::get<BiweightLoss>(loss).c;
  const double cap = c * c / 6.0;
  if (std::abs(r) >= c) return cap;
  const double q = 1.0 - (r / c) * (r / c);
  return cap * (1.0 - q * q * q);
}

RobustSegmentFit robust_segment_fit(const RobustLoss& loss, std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("robust_segment_fit: empty segment");
  check_loss(loss);
  auto objective = [&](double c) {
    double total = 0.0;
    for (double v : y) total += robust_rho(loss, v - c);
    return total;
  };
  double loc = median_of(std::vector<double>(y.begin(), y.end()));
  double value = objective(loc);
  bool converged = false;
  for (int iter = 0; iter < kIrlsMaxIter; ++iter) {
    double sw = 0.0;
    double swy = 0.0;
    double grad = 0.0;
    double curv = 0.0;
    for (double v : y) {
      const double r = v - loc;
      const double w = irls_weight(loss, r);
      sw += w;
      swy += w * v;
      grad += w * r;
      curv += psi_prime(loss, r);
    }
    // Every point beyond the biweight cutoff: the cost is flat in loc.
    if (sw == 0.0) {
      converged = true;
      break;
    }
    // IRLS never increases the objective; a Newton step is taken instead
    // when it does at least as well, which fixes the slow linear rate near
    // the biweight cutoff.
    double next = swy / sw;
    double next_value = objective(next);
    if (curv > 0.0) {
      const double newton = loc + grad / curv;
      const double newton_value = objective(newton);
      if (newton_value <= next_value) {
        next = newton;
        next_value = newton_value;
      }
    }
    // No descent left up to rounding.
    if (next_value > value) {
      converged = true;
      break;
    }
    const double step = std::abs(next - loc);
    loc = next;
    value = next_value;
    if (step < kIrlsTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ComputationError("robust_segment_fit: no convergence after " +
                           std::to_string(kIrlsMaxIter) + " iterations on a segment of length " +
                           std::to_string(y.size()));
  }
  return {loc, value};
}

PenalizedFit robust_penalized_dp(std::span<const double> y, const RobustLoss& loss,
                                 double beta) {
  const std::size_t n = y.size();
  if (n == 0) throw std::invalid_argument("robust_penalized_dp: empty series");
  if (!(beta >= 0.0)) throw std::invalid_argument("robust_penalized_dp: beta must be nonnegative");
  check_loss(loss);
  for (double v : y) {
    if (!std::isfinite(v)) throw std::domain_error("robust_penalized_dp: non-finite observation");
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    return robust_segment_fit(loss, y.subspan(i - 1, j - i + 1)).cost;
  };
  auto path = detail::penalized_partition(n, beta, cost, true);
  Partition partition(n, std::move(path.changepoints));
  std::vector<double> values;
  double total = 0.0;
  for (std::size_t s = 0; s < partition.segment_count(); ++s) {
    const std::size_t i = partition.segment_begin(s);
    const auto fit = robust_segment_fit(loss, y.subspan(i - 1, partition.segment_length(s)));
    values.push_back(fit.location);
    total += fit.cost;
  }
  const std::string label =
      std::holds_alternative<HuberLoss>(loss) ? "robust-huber" : "robust-biweight";
  return {StepFn(std::move(partition), std::move(values), label), total, path.objective};
}

std::vector<double> vst_transform(const ExpFamily& fam, std::span<const double> y) {
  std::vector<double> out;
  out.reserve(y.size());
  switch (fam.kind()) {
    case FamilyKind::Gaussian:
      for (double v : y) {
        fam.require_support(v);
        out.push_back(v);
      }
      break;
    case FamilyKind::Poisson:
      for (double v : y) {
        fam.require_support(v);
        out.push_back(2.0 * std::sqrt(v + 0.25));
      }
      break;
    case FamilyKind::Exponential:
      for (double v : y) {
        fam.require_support(v);
        out.push_back(std::log(2.0 * v));
      }
      break;
    case FamilyKind::Bernoulli:
      throw std::domain_error("vst_transform: no variance-stabilizing transform for bernoulli");
  }
  return out;
}

MadEstimate mad_sigma(std::span<const double> y) {
  if (y.size() < 2) throw std::invalid_argument("mad_sigma: need at least 2 points");
  std::vector<double> diffs;
  diffs.reserve(y.size() - 1);
  for (std::size_t t = 1; t < y.size(); ++t) {
    const double d = std::abs(y[t] - y[t - 1]);
    if (!std::isfinite(d)) throw std::domain_error("mad_sigma: non-finite observation");
    diffs.push_back(d);
  }
  const double sigma = median_of(std::move(diffs)) / (0.6744897 * std::sqrt(2.0));
  const double floor = std::numeric_limits<double>::epsilon();
  if (sigma < floor) return {floor, true};
  return {sigma, false};
}

}  // namespace stepsel
