#include "stepsel/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stepsel {

namespace {

std::vector<double> log_all(std::vector<double> means) {
  for (double& m : means) m = std::log(m);
  return means;
}

// N equal segments over 1..n; parameter of segment j (1-based) is param(j).
template <class F>
SignalSpec equal_segments(std::string name, ExpFamily fam, std::size_t n, std::size_t count,
                          F param) {
  SignalSpec s;
  s.family = fam;
  s.n = n;
  s.name = std::move(name);
  const std::size_t len = n / count;
  for (std::size_t j = 1; j < count; ++j) s.changepoints.push_back(1 + j * len);
  for (std::size_t j = 1; j <= count; ++j) s.seg_params.push_back(param(static_cast<double>(j)));
  return s;
}

}  // namespace

void SignalSpec::validate() const {
  if (n == 0) throw std::invalid_argument("signal '" + name + "': n must be positive");
  if (seg_params.size() != changepoints.size() + 1) {
    throw std::invalid_argument("signal '" + name + "': expected " +
                                std::to_string(changepoints.size() + 1) + " segment parameters, got " +
                                std::to_string(seg_params.size()));
  }
  truth().validate(family);
}

StepFn SignalSpec::truth() const { return StepFn(Partition(n, changepoints), seg_params, name); }

std::vector<std::string> builtin_signal_names() {
  std::vector<std::string> names{"fms-type", "mix-type", "teeth-type", "stairs-type"};
  for (const char* fam : {"gauss", "pois", "exp"}) {
    for (int count : {5, 10, 20}) {
      names.push_back(std::string("calib-") + fam + "-N" + std::to_string(count));
    }
  }
  return names;
}

SignalSpec builtin_signal(const std::string& name) {
  SignalSpec s;
  s.name = name;
  if (name == "fms-type") {
    s.family = ExpFamily::poisson();
    s.n = 497;
    s.changepoints = {139, 226, 243, 300, 309, 333};
    s.seg_params = log_all({4, 6, 10, 3, 7, 1, 5});
    return s;
  }
  if (name == "mix-type") {
    s.family = ExpFamily::poisson();
    s.n = 560;
    s.changepoints = {11, 21, 41, 61, 91, 121, 161, 201, 251, 301, 361, 421, 491};
    s.seg_params = log_all({30, 2, 26, 4, 24, 6, 22, 8, 20, 10, 18, 12, 16, 14});
    return s;
  }
  if (name == "teeth-type") {
    s.family = ExpFamily::exponential();
    s.n = 140;
    for (std::size_t j = 0; j < 14; ++j) {
      if (j > 0) s.changepoints.push_back(1 + 10 * j);
      s.seg_params.push_back(j % 2 == 0 ? 0.5 : 5.0);
    }
    return s;
  }
  if (name == "stairs-type") {
    s.family = ExpFamily::exponential();
    s.n = 500;
    s.changepoints = {101, 201, 301, 401};
    s.seg_params = {16.0, 4.0, 1.0, 0.25, 0.0625};
    return s;
  }
  for (std::size_t count : {5u, 10u, 20u}) {
    const std::string suffix = "-N" + std::to_string(count);
    if (name == "calib-gauss" + suffix) {
      return equal_segments(name, ExpFamily::gaussian(1.0), 500, count,
                            [](double j) { return (j + 1.0) / 2.0; });
    }
    if (name == "calib-pois" + suffix) {
      return equal_segments(name, ExpFamily::poisson(), 500, count,
                            [](double j) { return std::log(j); });
    }
    if (name == "calib-exp" + suffix) {
      return equal_segments(name, ExpFamily::exponential(), 500, count,
                            [](double j) { return 0.01 * j; });
    }
  }
  std::string list;
  for (const auto& known : builtin_signal_names()) list += (list.empty() ? "" : ", ") + known;
  throw std::invalid_argument("unknown signal '" + name + "'; available: " + list);
}

std::vector<double> sample_series(const SignalSpec& spec, Rng& rng) {
  spec.validate();
  const StepFn truth = spec.truth();
  std::vector<double> y;
  y.reserve(spec.n);
  for (std::size_t s = 0; s < truth.segment_count(); ++s) {
    const double g = truth.values()[s];
    for (std::size_t i = 0; i < truth.partition().segment_length(s); ++i) {
      y.push_back(sample(spec.family, g, rng));
    }
  }
  return y;
}

OutlierResult inject_outliers(std::span<const double> y, const OutlierSpec& spec, Rng& rng) {
  const std::size_t n = y.size();
  if (spec.count > n) {
    throw std::invalid_argument("inject_outliers: count " + std::to_string(spec.count) +
                                " exceeds series length " + std::to_string(n));
  }
  if (!std::isfinite(spec.value)) {
    throw std::invalid_argument("inject_outliers: value must be finite");
  }
  OutlierResult out{std::vector<double>(y.begin(), y.end()), {}};
  // Partial Fisher-Yates over the indices.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{1});
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(n - i));
    std::swap(idx[i], idx[j]);
    out.series[idx[i] - 1] = spec.value;
  }
  out.indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(spec.count));
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

}  // namespace stepsel
