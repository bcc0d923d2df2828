#include "stepsel/selector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepsel {

namespace {

// psi(sqrt(x)) = tanh(log(x) / 4). tanh is evaluated on |z| and the sign
// restored so that T(a, b) = -T(b, a) holds bit for bit.
double psi_of_log_ratio(double log_ratio) {
  const double z = 0.25 * log_ratio;
  return std::copysign(std::tanh(std::abs(z)), z);
}

// u(g(i)) and A(g(i)) for every index of a candidate.
struct NaturalTrack {
  std::vector<double> u;
  std::vector<double> a;
};

NaturalTrack natural_track(const ExpFamily& fam, const StepFn& f) {
  f.validate(fam);
  NaturalTrack track;
  track.u.reserve(f.n());
  track.a.reserve(f.n());
  for (std::size_t s = 0; s < f.segment_count(); ++s) {
    const double g = f.values()[s];
    const std::size_t len = f.partition().segment_length(s);
    track.u.insert(track.u.end(), len, fam.u(g));
    track.a.insert(track.a.end(), len, fam.A(g));
  }
  return track;
}

double t_from_tracks(std::span<const double> y, const NaturalTrack& a, const NaturalTrack& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    // Both densities are strictly positive for interior parameters, so the
    // 0/0 and a/0 conventions never apply.
    const double log_ratio = (b.u[i] - a.u[i]) * y[i] - (b.a[i] - a.a[i]);
    total += psi_of_log_ratio(log_ratio);
  }
  return total;
}

void check_inputs(const ExpFamily& fam, std::span<const double> y,
                  std::span<const StepFn> candidates) {
  for (double v : y) fam.require_support(v);
  for (const auto& c : candidates) {
    if (c.n() != y.size()) {
      throw std::invalid_argument("candidate '" + c.label() + "' has length " +
                                  std::to_string(c.n()) + ", data has " +
                                  std::to_string(y.size()));
    }
  }
}

}  // namespace

PenaltyConfig PenaltyConfig::from_c0(double c0, double alpha) {
  PenaltyConfig cfg{c0 * (2.0 * alpha + 0.5), alpha};
  cfg.validate();
  return cfg;
}

void PenaltyConfig::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("penalty: kappa must be positive");
  }
  if (!(alpha >= 1.0)) {
    throw std::invalid_argument("penalty: alpha must be >= 1");
  }
}

double psi(double x) {
  if (std::isnan(x) || x < 0.0) {
    throw std::invalid_argument("psi: argument must lie in [0, +inf]");
  }
  if (std::isinf(x)) return 1.0;
  return (x - 1.0) / (x + 1.0);
}

double t_statistic(const ExpFamily& fam, std::span<const double> y, const StepFn& a,
                   const StepFn& b) {
  const StepFn pair[] = {a, b};
  check_inputs(fam, y, pair);
  return t_from_tracks(y, natural_track(fam, a), natural_track(fam, b));
}

double penalty(const PenaltyConfig& cfg, std::size_t n, std::size_t k) {
  if (k < 1 || k > n) {
    throw std::invalid_argument("penalty: segment count outside 1..n");
  }
  // 10.11 k = 9.11 k + k, so this is kappa * (dn_complexity + delta_weight).
  const double kd = static_cast<double>(k);
  return cfg.kappa *
         (kd * (10.11 + std::log(static_cast<double>(n) / kd)) + log_binomial(n - 1, k - 1));
}

TMatrix t_matrix(const ExpFamily& fam, std::span<const double> y,
                 std::span<const StepFn> candidates) {
  check_inputs(fam, y, candidates);
  std::vector<NaturalTrack> tracks;
  tracks.reserve(candidates.size());
  for (const auto& c : candidates) tracks.push_back(natural_track(fam, c));

  TMatrix t(candidates.size());
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    for (std::size_t b = a + 1; b < candidates.size(); ++b) {
      const double v = t_from_tracks(y, tracks[a], tracks[b]);
      t(a, b) = v;
      t(b, a) = -v;
    }
  }
  return t;
}

SelectionResult select_from_matrix(TMatrix t, std::vector<double> penalties) {
  const std::size_t size = t.size();
  if (size == 0) {
    throw std::invalid_argument("selection: empty candidate list");
  }
  if (penalties.size() != size) {
    throw std::invalid_argument("selection: penalty count does not match T-matrix");
  }
  SelectionResult res;
  res.upsilon.resize(size);
  for (std::size_t a = 0; a < size; ++a) {
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < size; ++b) {
      sup = std::max(sup, t(a, b) - penalties[b]);
    }
    res.upsilon[a] = sup + penalties[a];
  }
  const auto best = std::min_element(res.upsilon.begin(), res.upsilon.end());
  res.chosen = static_cast<std::size_t>(best - res.upsilon.begin());
  for (std::size_t a = 0; a < size; ++a) {
    if (res.upsilon[a] - *best <= kUpsilonTieTolerance) res.ties.push_back(a);
  }
  // Lowest index among ties.
  res.chosen = res.ties.front();
  res.t_matrix = std::move(t);
  res.penalties = std::move(penalties);
  return res;
}

SelectionResult upsilon_scores(const ExpFamily& fam, std::span<const double> y,
                               std::span<const StepFn> candidates, const PenaltyConfig& cfg) {
  cfg.validate();
  if (candidates.empty()) {
    throw std::invalid_argument("selection: empty candidate list");
  }
  std::vector<double> pens;
  pens.reserve(candidates.size());
  for (const auto& c : candidates) pens.push_back(penalty(cfg, y.size(), c.segment_count()));
  return select_from_matrix(t_matrix(fam, y, candidates), std::move(pens));
}

SelectionResult select(const ExpFamily& fam, std::span<const double> y,
                       std::span<const StepFn> candidates, const PenaltyConfig& cfg) {
  return upsilon_scores(fam, y, candidates, cfg);
}

}  // namespace stepsel
