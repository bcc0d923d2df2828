#pragma once

// One-parameter exponential families written as
//
//   r_g(y) = exp(u(g) T(y) - A(g))   with respect to a carrier measure.
//
// Parametrizations:
//
//   family                 parameter g          u(g)       T(y)  A(g)
//   gaussian (sigma known) mean, real           g/sigma^2  y     g^2/(2 sigma^2)
//   poisson                log-mean, real       g          y     exp(g)
//   exponential            rate, g > 0          -g         y     -log(g)
//   bernoulli              log-odds, real       g          y     log(1 + exp(g))

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stepsel/rng.hpp"

namespace stepsel {

enum class FamilyKind { Gaussian, Poisson, Exponential, Bernoulli };

/// Lower floor on a fitted Poisson mean.
inline constexpr double kPoissonMeanFloor = 1e-6;
/// Lower floor on a fitted exponential mean (so the rate is at most 1e9).
inline constexpr double kExponentialMeanFloor = 1e-9;

class ExpFamily {
 public:
  static ExpFamily gaussian(double sigma);
  static ExpFamily poisson() { return ExpFamily(FamilyKind::Poisson, 1.0); }
  static ExpFamily exponential() { return ExpFamily(FamilyKind::Exponential, 1.0); }
  static ExpFamily bernoulli() { return ExpFamily(FamilyKind::Bernoulli, 1.0); }

  /// Parses "gaussian", "poisson", "exponential" or "bernoulli". sigma is
  /// only read for the Gaussian family.
  static ExpFamily from_name(const std::string& name, double sigma = 1.0);

  FamilyKind kind() const { return kind_; }
  /// Known standard deviation; 1 for non-Gaussian families.
  double sigma() const { return sigma_; }
  std::string name() const;

  double u(double g) const;
  double T(double y) const { return y; }
  double A(double g) const;

  /// g lies in the (open) parameter interval.
  bool in_domain(double g) const;
  /// y is a possible observation.
  bool in_support(double y) const;

  void require_domain(double g) const;
  void require_support(double y) const;

  friend bool operator==(const ExpFamily&, const ExpFamily&) = default;

 private:
  ExpFamily(FamilyKind kind, double sigma) : kind_(kind), sigma_(sigma) {}

  FamilyKind kind_;
  double sigma_;
};

/// Log density including the carrier term (e.g. -log y! for Poisson).
double log_density(const ExpFamily& fam, double g, double y);

/// log r_{g2}(y) - log r_{g1}(y), with the carrier cancelled analytically.
double log_density_ratio(const ExpFamily& fam, double g1, double g2, double y);

/// One draw from R_g.
double sample(const ExpFamily& fam, double g, Rng& rng);

/// Maximum likelihood estimate on a slice, clamped into the interior:
/// Poisson mean >= kPoissonMeanFloor, exponential mean >= kExponentialMeanFloor,
/// Bernoulli frequency in [1/(2k), 1 - 1/(2k)] for a slice of length k.
double mle(const ExpFamily& fam, std::span<const double> y);

/// Squared Hellinger distance between R_{g1} and R_{g2}, in closed form.
double hellinger_sq(const ExpFamily& fam, double g1, double g2);

/// Prefix sums of T(y) and y^2 for O(1) segment costs.
class SufficientPrefix {
 public:
  SufficientPrefix(const ExpFamily& fam, std::span<const double> y);

  std::size_t size() const { return sum_t_.size() - 1; }
  /// Sum of T(y_t) for t in [i, j], 1-based inclusive.
  double sum_t(std::size_t i, std::size_t j) const { return sum_t_[j] - sum_t_[i - 1]; }
  double sum_sq(std::size_t i, std::size_t j) const { return sum_sq_[j] - sum_sq_[i - 1]; }

 private:
  std::vector<double> sum_t_;
  std::vector<double> sum_sq_;
};

/// Negative maximized log-likelihood of y_i..y_j (1-based, inclusive) at the
/// clamped MLE. Constant carrier terms are dropped; for the Gaussian family
/// the y^2/(2 sigma^2) part is kept so the cost is RSS / (2 sigma^2).
double segment_cost(const ExpFamily& fam, const SufficientPrefix& prefix,
                    std::size_t i, std::size_t j);

/// Same cost evaluated at a fixed parameter instead of the MLE.
double segment_cost_at(const ExpFamily& fam, const SufficientPrefix& prefix,
                       std::size_t i, std::size_t j, double g);

/// Clamped MLE computed from the segment's sufficient statistics.
double segment_mle(const ExpFamily& fam, const SufficientPrefix& prefix,
                   std::size_t i, std::size_t j);

}  // namespace stepsel
