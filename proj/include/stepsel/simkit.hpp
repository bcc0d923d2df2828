#pragma once

// Truth signals, samplers and outlier injection.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stepsel/expfam.hpp"
#include "stepsel/rng.hpp"
#include "stepsel/stepfn.hpp"

namespace stepsel {

struct SignalSpec {
  ExpFamily family = ExpFamily::poisson();
  std::size_t n = 0;
  /// Segment starts, 1-based.
  std::vector<std::size_t> changepoints;
  /// One parameter per segment on the family's parameter scale (log-mean for
  /// Poisson, rate for exponential).
  std::vector<double> seg_params;
  std::string name;

  /// Throws std::invalid_argument / std::domain_error on a bad spec.
  void validate() const;
  StepFn truth() const;
  std::size_t segment_count() const { return changepoints.size() + 1; }
};

/// Names accepted by builtin_signal().
std::vector<std::string> builtin_signal_names();

/// fms-type, mix-type (Poisson), teeth-type, stairs-type (exponential) and
/// the calibration settings calib-{gauss,pois,exp}-N{5,10,20}.
SignalSpec builtin_signal(const std::string& name);

/// One draw y_i ~ R_{g(i)} per index.
std::vector<double> sample_series(const SignalSpec& spec, Rng& rng);

struct OutlierSpec {
  std::size_t count = 0;
  double value = 0.0;
};

struct OutlierResult {
  std::vector<double> series;
  /// Replaced indices, 1-based, ascending.
  std::vector<std::size_t> indices;
};

/// Replaces count distinct indices, drawn uniformly without replacement, by
/// spec.value.
OutlierResult inject_outliers(std::span<const double> y, const OutlierSpec& spec, Rng& rng);

}  // namespace stepsel
