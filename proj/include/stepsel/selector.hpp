#pragma once

// Pairwise estimator selection among piecewise-constant candidates.
//
// For candidates g_1..g_L fitted on the same observations y_1..y_n:
//
//   T(g, g')  = sum_i psi( sqrt( r_{g'(i)}(y_i) / r_{g(i)}(y_i) ) ),
//   psi(x)    = (x - 1) / (x + 1),
//   pen(g)    = kappa * ( k (10.11 + log(n / k)) + log C(n - 1, k - 1) ),
//   upsilon(g) = max_{g'} [ T(g, g') - pen(g') ] + pen(g),
//
// where k is the segment count of g's partition. The selected candidate is
// the exact argmin of upsilon.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "stepsel/expfam.hpp"
#include "stepsel/stepfn.hpp"

namespace stepsel {

struct PenaltyConfig {
  /// Multiplier on the penalty shape; absorbs the constant (2 alpha + 1/2) C0.
  double kappa = 0.08;
  /// Refinement constant; 1 for partitions of an interval.
  double alpha = 1.0;

  /// kappa = c0 * (2 alpha + 1/2).
  static PenaltyConfig from_c0(double c0, double alpha = 1.0);
  void validate() const;
};

/// Absolute tolerance on upsilon when collecting ties.
inline constexpr double kUpsilonTieTolerance = 1e-9;

/// psi(x) = (x - 1) / (x + 1) on [0, +inf], psi(+inf) = 1.
double psi(double x);

/// T(a, b) computed as sum_i tanh(log_density_ratio(a_i, b_i, y_i) / 4).
double t_statistic(const ExpFamily& fam, std::span<const double> y, const StepFn& a,
                   const StepFn& b);

double penalty(const PenaltyConfig& cfg, std::size_t n, std::size_t k);

/// Square antisymmetric matrix, row-major.
class TMatrix {
 public:
  explicit TMatrix(std::size_t size = 0) : size_(size), data_(size * size, 0.0) {}
  std::size_t size() const { return size_; }
  double operator()(std::size_t a, std::size_t b) const { return data_[a * size_ + b]; }
  double& operator()(std::size_t a, std::size_t b) { return data_[a * size_ + b]; }

 private:
  std::size_t size_;
  std::vector<double> data_;
};

/// Full T-matrix for a candidate list; only the upper triangle is evaluated.
TMatrix t_matrix(const ExpFamily& fam, std::span<const double> y,
                 std::span<const StepFn> candidates);

struct SelectionResult {
  std::size_t chosen = 0;
  std::vector<double> upsilon;
  TMatrix t_matrix;
  std::vector<double> penalties;
  /// Candidates with upsilon within kUpsilonTieTolerance of the minimum.
  std::vector<std::size_t> ties;
};

/// Upsilon from a precomputed T-matrix and penalties; fills chosen and ties.
SelectionResult select_from_matrix(TMatrix t, std::vector<double> penalties);

/// Computes the T-matrix, penalties and upsilon without choosing.
SelectionResult upsilon_scores(const ExpFamily& fam, std::span<const double> y,
                               std::span<const StepFn> candidates, const PenaltyConfig& cfg);

/// Exact argmin of upsilon; ties broken by the lowest candidate index.
SelectionResult select(const ExpFamily& fam, std::span<const double> y,
                       std::span<const StepFn> candidates, const PenaltyConfig& cfg);

}  // namespace stepsel
