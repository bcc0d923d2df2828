#include "stepsel/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "stepsel/segmenters.hpp"

namespace stepsel {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Sum in sorted order so the result does not depend on insertion order.
double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

double pseudo_hellinger_risk(const ExpFamily& fam, const StepFn& truth, const StepFn& estimate) {
  if (truth.n() != estimate.n()) {
    throw std::invalid_argument("pseudo_hellinger_risk: truth has length " +
                                std::to_string(truth.n()) + ", estimate has " +
                                std::to_string(estimate.n()));
  }
  truth.validate(fam);
  estimate.validate(fam);
  // Walk the common refinement: the loss is constant on each of its pieces.
  const Partition common = refine(truth.partition(), estimate.partition());
  double total = 0.0;
  for (std::size_t s = 0; s < common.segment_count(); ++s) {
    const std::size_t i = common.segment_begin(s);
    total += static_cast<double>(common.segment_length(s)) *
             hellinger_sq(fam, truth.eval_at(i), estimate.eval_at(i));
  }
  return total;
}

double pseudo_hellinger_risk(const SignalSpec& truth, const StepFn& estimate) {
  return pseudo_hellinger_risk(truth.family, truth.truth(), estimate);
}

std::size_t FreqBins::bin_of(long long diff) const {
  if (diff <= lo) return 0;
  if (diff >= hi) return count() - 1;
  return static_cast<std::size_t>(diff - lo);
}

std::vector<std::string> FreqBins::labels() const {
  std::vector<std::string> out{"<=" + std::to_string(lo)};
  for (int d = lo + 1; d < hi; ++d) out.push_back(std::to_string(d));
  out.push_back(">=" + std::to_string(hi));
  return out;
}

const RiskRow& AggregateReport::risk_of(const std::string& method) const {
  for (const auto& r : risk) {
    if (r.method == method) return r;
  }
  throw std::out_of_range("no risk row for method '" + method + "'");
}

const FreqRow& AggregateReport::freq_of(const std::string& method) const {
  for (const auto& r : freq) {
    if (r.method == method) return r;
  }
  throw std::out_of_range("no frequency row for method '" + method + "'");
}

double AggregateReport::contribution_of(const std::string& generator) const {
  for (const auto& r : contribution) {
    if (r.generator == generator) return r.freq;
  }
  return 0.0;
}

void Aggregator::add(const ReplicationRecord& record) {
  if (record.methods.empty()) {
    throw std::invalid_argument("replication " + std::to_string(record.index) +
                                ": record has no methods");
  }
  if (bins_.hi <= bins_.lo) throw std::invalid_argument("frequency bins: need lo < hi");
  for (std::size_t a = 0; a < record.methods.size(); ++a) {
    const auto& m = record.methods[a];
    if (m.method.empty()) {
      throw std::invalid_argument("replication " + std::to_string(record.index) +
                                  ": empty method label");
    }
    if (!std::isfinite(m.loss) || m.loss < 0.0) {
      throw std::invalid_argument("replication " + std::to_string(record.index) + ", method '" +
                                  m.method + "': loss must be finite and nonnegative");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (record.methods[b].method == m.method) {
        throw std::invalid_argument("replication " + std::to_string(record.index) +
                                    ": method '" + m.method + "' appears twice");
      }
    }
  }
  for (std::size_t a = 0; a < record.methods.size(); ++a) {
    const auto& m = record.methods[a];
    auto& state = methods_[m.method];
    if (state.bin_counts.empty()) state.bin_counts.assign(bins_.count(), 0);
    state.losses.push_back(m.loss);
    const long long diff =
        static_cast<long long>(m.segments) - static_cast<long long>(record.true_segments);
    ++state.bin_counts[bins_.bin_of(diff)];
    auto [it, inserted] = rank_.emplace(m.method, a);
    if (!inserted) it->second = std::min(it->second, a);
  }
  if (!record.selected_generator.empty()) ++contributions_[record.selected_generator];
  ++replications_;
}

void Aggregator::merge(const Aggregator& other) {
  if (other.bins_.lo != bins_.lo || other.bins_.hi != bins_.hi) {
    throw std::invalid_argument("cannot merge aggregates with different frequency bins");
  }
  for (const auto& [label, state] : other.methods_) {
    auto& mine = methods_[label];
    if (mine.bin_counts.empty()) mine.bin_counts.assign(bins_.count(), 0);
    mine.losses.insert(mine.losses.end(), state.losses.begin(), state.losses.end());
    for (std::size_t b = 0; b < state.bin_counts.size(); ++b) {
      mine.bin_counts[b] += state.bin_counts[b];
    }
  }
  for (const auto& [label, r] : other.rank_) {
    auto [it, inserted] = rank_.emplace(label, r);
    if (!inserted) it->second = std::min(it->second, r);
  }
  for (const auto& [gen, c] : other.contributions_) contributions_[gen] += c;
  replications_ += other.replications_;
}

AggregateReport Aggregator::finish() const {
  if (replications_ == 0) throw std::invalid_argument("aggregate: no replications");
  AggregateReport rep;
  rep.replications = replications_;
  rep.bins = bins_;

  std::vector<std::string> order;
  for (const auto& [label, state] : methods_) order.push_back(label);
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    return rank_.at(a) < rank_.at(b);
  });

  for (const auto& label : order) {
    const auto& state = methods_.at(label);
    const std::size_t nr = state.losses.size();
    const double nd = static_cast<double>(nr);
    const double mean = sorted_sum(state.losses) / nd;
    RiskRow row{label, mean, 0.0, nr, nr < 2};
    if (nr >= 2) {
      std::vector<double> sq;
      sq.reserve(nr);
      for (double l : state.losses) sq.push_back((l - mean) * (l - mean));
      const double sd = std::sqrt(sorted_sum(std::move(sq)) / (nd - 1.0));
      row.uncertainty = 2.0 * sd / std::sqrt(nd);
    }
    rep.risk.push_back(row);
    FreqRow f{label, {}};
    for (std::size_t c : state.bin_counts) f.freq.push_back(static_cast<double>(c) / nd);
    rep.freq.push_back(std::move(f));
  }

  // Every generator that produced a method row, plus any that was selected.
  std::vector<std::string> gens;
  for (const auto& label : order) {
    const std::string g = generator_of(label);
    if (label != "ES" && std::find(gens.begin(), gens.end(), g) == gens.end()) gens.push_back(g);
  }
  for (const auto& [g, c] : contributions_) {
    if (std::find(gens.begin(), gens.end(), g) == gens.end()) gens.push_back(g);
  }
  for (const auto& g : gens) {
    const auto it = contributions_.find(g);
    const std::size_t c = it == contributions_.end() ? 0 : it->second;
    rep.contribution.push_back({g, static_cast<double>(c) / static_cast<double>(replications_), c});
  }
  return rep;
}

AggregateReport aggregate(std::span<const ReplicationRecord> records, FreqBins bins) {
  Aggregator agg(bins);
  for (const auto& r : records) agg.add(r);
  return agg.finish();
}

OracleBound oracle_bound_check(const ExpFamily& fam, const StepFn& truth,
                               std::span<const StepFn> candidates, std::size_t chosen,
                               const PenaltyConfig& cfg, double xi) {
  if (candidates.empty()) throw std::invalid_argument("oracle_bound_check: no candidates");
  if (chosen >= candidates.size()) {
    throw std::out_of_range("oracle_bound_check: chosen index out of range");
  }
  OracleBound out;
  out.lhs = pseudo_hellinger_risk(fam, truth, candidates[chosen]);
  double inf = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const double v = kOracleC1 * pseudo_hellinger_risk(fam, truth, c) +
                     kOracleC2 * penalty(cfg, c.n(), c.segment_count());
    inf = std::min(inf, v);
  }
  out.rhs = inf + kOracleC3 * (1.471 + xi);
  out.margin = out.rhs - out.lhs;
  out.satisfied = out.lhs <= out.rhs;
  return out;
}

void write_risk_csv(std::ostream& os, const AggregateReport& report) {
  os << "method,risk,uncertainty,replications\n";
  for (const auto& r : report.risk) {
    os << r.method << ',' << num(r.risk) << ',' << num(r.uncertainty) << ',' << r.replications
       << '\n';
  }
}

void write_freq_csv(std::ostream& os, const AggregateReport& report) {
  os << "method";
  for (const auto& l : report.bins.labels()) os << ',' << l;
  os << '\n';
  for (const auto& r : report.freq) {
    os << r.method;
    for (double f : r.freq) os << ',' << num(f);
    os << '\n';
  }
}

void write_contribution_csv(std::ostream& os, const AggregateReport& report) {
  os << "generator,contribution,count\n";
  for (const auto& r : report.contribution) {
    os << r.generator << ',' << num(r.freq) << ',' << r.count << '\n';
  }
}

void write_table_csv(std::ostream& os, const AggregateReport& report) {
  os << "method";
  for (const auto& l : report.bins.labels()) os << ',' << l;
  os << ",risk,uncertainty,contribution\n";
  for (std::size_t m = 0; m < report.risk.size(); ++m) {
    const auto& r = report.risk[m];
    os << r.method;
    for (double f : report.freq[m].freq) os << ',' << num(f);
    os << ',' << num(r.risk) << ',' << num(r.uncertainty) << ',';
    // Contribution is per generator; only single-output generators map 1:1.
    for (const auto& c : report.contribution) {
      if (c.generator == r.method) os << num(c.freq);
    }
    os << '\n';
  }
}

}  // namespace stepsel
