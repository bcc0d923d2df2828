#include "stepsel/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stepsel {

namespace {

double log1pexp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double mle_from_mean(const ExpFamily& fam, double mean, std::size_t k) {
  switch (fam.kind()) {
    case FamilyKind::Gaussian:
      return mean;
    case FamilyKind::Poisson:
      return std::log(std::max(mean, kPoissonMeanFloor));
    case FamilyKind::Exponential:
      return 1.0 / std::max(mean, kExponentialMeanFloor);
    case FamilyKind::Bernoulli: {
      const double lo = 1.0 / (2.0 * static_cast<double>(k));
      const double p = std::clamp(mean, lo, 1.0 - lo);
      return std::log(p) - std::log1p(-p);
    }
  }
  throw std::logic_error("unknown family");
}

}  // namespace

ExpFamily ExpFamily::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("gaussian family: sigma must be positive and finite");
  }
  return ExpFamily(FamilyKind::Gaussian, sigma);
}

ExpFamily ExpFamily::from_name(const std::string& name, double sigma) {
  if (name == "gaussian") return gaussian(sigma);
  if (name == "poisson") return poisson();
  if (name == "exponential") return exponential();
  if (name == "bernoulli") return bernoulli();
  throw std::invalid_argument("unknown family '" + name +
                              "' (expected gaussian, poisson, exponential or bernoulli)");
}

std::string ExpFamily::name() const {
  switch (kind_) {
    case FamilyKind::Gaussian: return "gaussian";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Exponential: return "exponential";
    case FamilyKind::Bernoulli: return "bernoulli";
  }
  return "unknown";
}

double ExpFamily::u(double g) const {
  switch (kind_) {
    case FamilyKind::Gaussian: return g / (sigma_ * sigma_);
    case FamilyKind::Poisson: return g;
    case FamilyKind::Exponential: return -g;
    case FamilyKind::Bernoulli: return g;
  }
  return 0.0;
}

double ExpFamily::A(double g) const {
  switch (kind_) {
    case FamilyKind::Gaussian: return g * g / (2.0 * sigma_ * sigma_);
    case FamilyKind::Poisson: return std::exp(g);
    case FamilyKind::Exponential: return -std::log(g);
    case FamilyKind::Bernoulli: return log1pexp(g);
  }
  return 0.0;
}

bool ExpFamily::in_domain(double g) const {
  if (!std::isfinite(g)) return false;
  return kind_ != FamilyKind::Exponential || g > 0.0;
}

bool ExpFamily::in_support(double y) const {
  if (!std::isfinite(y)) return false;
  switch (kind_) {
    case FamilyKind::Gaussian: return true;
    case FamilyKind::Poisson: return y >= 0.0 && y == std::floor(y);
    case FamilyKind::Exponential: return y > 0.0;
    case FamilyKind::Bernoulli: return y == 0.0 || y == 1.0;
  }
  return false;
}

void ExpFamily::require_domain(double g) const {
  if (!in_domain(g)) {
    throw std::domain_error(name() + ": parameter " + std::to_string(g) +
                            " outside the parameter interval");
  }
}

void ExpFamily::require_support(double y) const {
  if (!in_support(y)) {
    throw std::domain_error(name() + ": observation " + std::to_string(y) +
                            " outside the support");
  }
}

double log_density(const ExpFamily& fam, double g, double y) {
  fam.require_domain(g);
  fam.require_support(y);
  switch (fam.kind()) {
    case FamilyKind::Gaussian: {
      const double s2 = fam.sigma() * fam.sigma();
      const double d = y - g;
      return -0.5 * std::log(2.0 * std::numbers::pi * s2) - d * d / (2.0 * s2);
    }
    case FamilyKind::Poisson:
      return g * y - std::exp(g) - std::lgamma(y + 1.0);
    case FamilyKind::Exponential:
      return std::log(g) - g * y;
    case FamilyKind::Bernoulli:
      return g * y - log1pexp(g);
  }
  return 0.0;
}

double log_density_ratio(const ExpFamily& fam, double g1, double g2, double y) {
  fam.require_domain(g1);
  fam.require_domain(g2);
  fam.require_support(y);
  const double du = fam.u(g2) - fam.u(g1);
  const double da = fam.A(g2) - fam.A(g1);
  return du * fam.T(y) - da;
}

double sample(const ExpFamily& fam, double g, Rng& rng) {
  fam.require_domain(g);
  switch (fam.kind()) {
    case FamilyKind::Gaussian:
      return g + fam.sigma() * rng.normal();
    case FamilyKind::Poisson:
      return static_cast<double>(rng.poisson(std::exp(g)));
    case FamilyKind::Exponential:
      return rng.exponential(g);
    case FamilyKind::Bernoulli: {
      const double p = 1.0 / (1.0 + std::exp(-g));
      return rng.uniform() < p ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

double mle(const ExpFamily& fam, std::span<const double> y) {
  if (y.empty()) {
    throw std::invalid_argument("mle: empty slice");
  }
  double sum = 0.0;
  for (double v : y) {
    fam.require_support(v);
    sum += fam.T(v);
  }
  return mle_from_mean(fam, sum / static_cast<double>(y.size()), y.size());
}

double hellinger_sq(const ExpFamily& fam, double g1, double g2) {
  fam.require_domain(g1);
  fam.require_domain(g2);
  if (g1 == g2) return 0.0;
  double h2 = 0.0;
  switch (fam.kind()) {
    case FamilyKind::Gaussian: {
      const double d = g1 - g2;
      h2 = -std::expm1(-d * d / (8.0 * fam.sigma() * fam.sigma()));
      break;
    }
    case FamilyKind::Poisson: {
      const double d = std::exp(0.5 * g1) - std::exp(0.5 * g2);
      h2 = -std::expm1(-0.5 * d * d);
      break;
    }
    case FamilyKind::Exponential: {
      const double d = std::sqrt(g1) - std::sqrt(g2);
      h2 = d * d / (g1 + g2);
      break;
    }
    case FamilyKind::Bernoulli: {
      // 1 - exp(A((g1+g2)/2) - (A(g1)+A(g2))/2) for the natural parameter.
      const double gap = log1pexp(0.5 * (g1 + g2)) - 0.5 * (log1pexp(g1) + log1pexp(g2));
      h2 = -std::expm1(gap);
      break;
    }
  }
  return std::clamp(h2, 0.0, 1.0);
}

SufficientPrefix::SufficientPrefix(const ExpFamily& fam, std::span<const double> y)
    : sum_t_(y.size() + 1, 0.0), sum_sq_(y.size() + 1, 0.0) {
  for (std::size_t t = 0; t < y.size(); ++t) {
    fam.require_support(y[t]);
    const double v = fam.T(y[t]);
    sum_t_[t + 1] = sum_t_[t] + v;
    sum_sq_[t + 1] = sum_sq_[t] + v * v;
  }
}

namespace {

void check_segment(const SufficientPrefix& prefix, std::size_t i, std::size_t j) {
  if (i < 1 || i > j || j > prefix.size()) {
    throw std::out_of_range("segment [" + std::to_string(i) + ", " + std::to_string(j) +
                            "] outside 1.." + std::to_string(prefix.size()));
  }
}

}  // namespace

double segment_mle(const ExpFamily& fam, const SufficientPrefix& prefix,
                   std::size_t i, std::size_t j) {
  check_segment(prefix, i, j);
  const std::size_t k = j - i + 1;
  return mle_from_mean(fam, prefix.sum_t(i, j) / static_cast<double>(k), k);
}

double segment_cost_at(const ExpFamily& fam, const SufficientPrefix& prefix,
                       std::size_t i, std::size_t j, double g) {
  check_segment(prefix, i, j);
  const double k = static_cast<double>(j - i + 1);
  const double s = prefix.sum_t(i, j);
  if (fam.kind() == FamilyKind::Gaussian) {
    const double q = prefix.sum_sq(i, j);
    return (q - 2.0 * g * s + k * g * g) / (2.0 * fam.sigma() * fam.sigma());
  }
  return k * fam.A(g) - fam.u(g) * s;
}

double segment_cost(const ExpFamily& fam, const SufficientPrefix& prefix,
                    std::size_t i, std::size_t j) {
  check_segment(prefix, i, j);
  const double k = static_cast<double>(j - i + 1);
  const double s = prefix.sum_t(i, j);
  if (fam.kind() == FamilyKind::Gaussian) {
    const double rss = prefix.sum_sq(i, j) - s * s / k;
    return std::max(rss, 0.0) / (2.0 * fam.sigma() * fam.sigma());
  }
  const double g = mle_from_mean(fam, s / k, j - i + 1);
  return k * fam.A(g) - fam.u(g) * s;
}

}  // namespace stepsel
