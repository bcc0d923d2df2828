#include <cmath>
#include <stdexcept>
#include <string>

#include "stepsel/segmenters.hpp"

namespace stepsel {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string method_name(const SegmenterMethod& method) {
  return std::visit(Overloaded{
                        [](const KSegDP&) { return std::string("kseg"); },
                        [](const Pelt&) { return std::string("pelt"); },
                        [](const BinSeg&) { return std::string("binseg"); },
                        [](const WbsSsic&) { return std::string("wbs-ssic"); },
                        [](const RobustDP& r) {
                          return std::string(std::holds_alternative<HuberLoss>(r.loss)
                                                 ? "robust-huber"
                                                 : "robust-biweight");
                        },
                    },
                    method);
}

void check_beta(const std::optional<double>& beta) {
  if (beta && !(*beta >= 0.0)) throw std::invalid_argument("segmenter: beta must be >= 0");
}

// 2 log n per segment on the deviance scale (twice the negative
// log-likelihood), i.e. log n on the half-scale costs used by the DPs.
double default_beta(std::size_t n) { return std::log(static_cast<double>(n)); }

StepFn refit(const ExpFamily& fam, const SufficientPrefix& prefix, const StepFn& fit) {
  const Partition& p = fit.partition();
  std::vector<double> values;
  values.reserve(p.segment_count());
  for (std::size_t s = 0; s < p.segment_count(); ++s) {
    values.push_back(segment_mle(fam, prefix, p.segment_begin(s), p.segment_end(s)));
  }
  return StepFn(p, std::move(values), fit.label());
}

std::vector<double> standardized(std::span<const double> z, double sigma) {
  std::vector<double> out(z.begin(), z.end());
  for (double& v : out) v /= sigma;
  return out;
}

// Runs one spec. Returns the raw fits and whether they already are family
// MLEs on the original data.
std::vector<StepFn> run_spec(const ExpFamily& fam, std::span<const double> y,
                             const SegmenterSpec& spec, Rng& rng, bool& native,
                             std::vector<std::string>& warnings) {
  const std::size_t n = y.size();
  std::vector<double> transformed;
  std::span<const double> z = y;
  if (spec.use_vst) {
    transformed = vst_transform(fam, y);
    z = transformed;
  } else {
    for (double v : y) fam.require_support(v);
  }
  native = !spec.use_vst;
  auto scale = [&]() {
    const MadEstimate mad = mad_sigma(z);
    if (mad.degenerate) warnings.push_back("MAD scale degenerate; using epsilon floor");
    return mad.sigma;
  };
  // Exact DPs run in the family's own scale unless the data were transformed,
  // in which case they use the Gaussian cost at the MAD scale.
  auto dp_family = [&]() { return spec.use_vst ? ExpFamily::gaussian(scale()) : fam; };

  return std::visit(
      Overloaded{
          [&](const KSegDP& m) { return k_segment_dp(dp_family(), z, m.k_max).fits; },
          [&](const Pelt& m) {
            return std::vector<StepFn>{
                pelt(dp_family(), z, m.beta.value_or(default_beta(n))).fit};
          },
          [&](const BinSeg& m) {
            native = false;
            return binary_segmentation(z, scale(), m.k_max);
          },
          [&](const WbsSsic& m) {
            native = false;
            WbsOptions opts;
            opts.intervals = m.intervals;
            opts.ssic_alpha = m.ssic_alpha;
            return std::vector<StepFn>{wbs_ssic(z, scale(), opts, rng)};
          },
          [&](const RobustDP& m) {
            native = false;
            const auto u = standardized(z, scale());
            return std::vector<StepFn>{
                robust_penalized_dp(u, m.loss, m.beta.value_or(default_beta(n))).fit};
          },
      },
      spec.method);
}

}  // namespace

std::string SegmenterSpec::effective_label() const {
  if (!label.empty()) return label;
  return method_name(method) + (use_vst ? "^t" : "");
}

void SegmenterSpec::validate() const {
  std::visit(Overloaded{
                 [](const KSegDP& m) {
                   if (m.k_max < 1) throw std::invalid_argument("kseg: k_max must be >= 1");
                 },
                 [](const Pelt& m) { check_beta(m.beta); },
                 [](const BinSeg& m) {
                   if (m.k_max < 1) throw std::invalid_argument("binseg: k_max must be >= 1");
                 },
                 [](const WbsSsic& m) {
                   if (m.intervals < 1) throw std::invalid_argument("wbs: intervals must be >= 1");
                   if (!(m.ssic_alpha > 0.0)) {
                     throw std::invalid_argument("wbs: ssic_alpha must be positive");
                   }
                 },
                 [](const RobustDP& m) {
                   check_beta(m.beta);
                   const double scale = std::holds_alternative<HuberLoss>(m.loss)
                                            ? std::get<HuberLoss>(m.loss).delta
                                            : std::get<BiweightLoss>(m.loss).c;
                   if (!(scale > 0.0)) {
                     throw std::invalid_argument("robust: loss constant must be positive");
                   }
                 },
             },
             method);
  if (label.find('/') != std::string::npos) {
    throw std::invalid_argument("segmenter label must not contain '/'");
  }
}

std::vector<SegmenterSpec> default_ensemble(std::size_t kseg_k_max) {
  return {
      {KSegDP{kseg_k_max}, false, true, {}},
      {Pelt{}, true, true, {}},
      {WbsSsic{}, true, true, {}},
      {RobustDP{BiweightLoss{}, {}}, true, true, {}},
      {RobustDP{HuberLoss{}, {}}, true, true, {}},
  };
}

CandidateSet generate_candidates(const ExpFamily& fam, std::span<const double> y,
                                 std::span<const SegmenterSpec> specs, std::uint64_t seed) {
  if (specs.empty()) throw std::invalid_argument("generate_candidates: no segmenter specs");
  if (y.empty()) throw std::invalid_argument("generate_candidates: empty series");
  const SufficientPrefix prefix(fam, y);
  CandidateSet out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const SegmenterSpec& spec = specs[i];
    const std::string name = spec.effective_label();
    std::vector<StepFn> fits;
    std::vector<std::string> warnings;
    bool native = false;
    try {
      spec.validate();
      Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(i)});
      fits = run_spec(fam, y, spec, rng, native, warnings);
    } catch (const std::exception& e) {
      out.diagnostics.push_back("spec " + std::to_string(i) + " (" + name + "): " + e.what());
      continue;
    }
    for (const auto& w : warnings) {
      out.diagnostics.push_back("spec " + std::to_string(i) + " (" + name + "): " + w);
    }
    const bool path = fits.size() > 1 || std::holds_alternative<KSegDP>(spec.method) ||
                      std::holds_alternative<BinSeg>(spec.method);
    for (auto& fit : fits) {
      std::string label = name;
      if (path) label += "/k=" + std::to_string(fit.segment_count());
      StepFn candidate = (spec.refit_mle || !native) ? refit(fam, prefix, fit) : fit;
      candidate.set_label(std::move(label));
      out.outputs.push_back({std::move(candidate), i});
    }
  }
  for (const auto& o : out.outputs) {
    bool seen = false;
    for (const auto& c : out.candidates) {
      if (c.same_function(o.fit)) {
        seen = true;
        break;
      }
    }
    if (!seen) out.candidates.push_back(o.fit);
  }
  return out;
}

std::string generator_of(const std::string& label) { return label.substr(0, label.find('/')); }

}  // namespace stepsel
