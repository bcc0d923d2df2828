#include "stepsel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json_codec.hpp"
#include "stepsel/errors.hpp"
#include "stepsel/io.hpp"

#ifndef STEPSEL_VERSION
#define STEPSEL_VERSION "unknown"
#endif

namespace stepsel {

namespace {

using detail::json;

// Runs fn(0..count-1) on up to `workers` threads. If any call throws, the
// exception of the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = count;
  std::exception_ptr failure;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void note_bound(BoundSummary& b, const OracleBound& ob) {
  if (b.checks == 0 || ob.margin < b.min_margin) b.min_margin = ob.margin;
  ++b.checks;
  if (!ob.satisfied) ++b.violations;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  write_text_file(path, text);
}

SignalSpec signal_from_config(const json& doc, const std::filesystem::path& base_dir,
                              const std::string& where) {
  const json& sig = detail::require(doc, "signal", where);
  if (sig.is_object()) return detail::signal_from_json(sig, where + ".signal");
  if (!sig.is_string()) throw ParseError(where + ".signal: expected a name, path or object");
  const std::string s = sig.get<std::string>();
  const auto names = builtin_signal_names();
  if (std::find(names.begin(), names.end(), s) != names.end()) return builtin_signal(s);
  std::filesystem::path p(s);
  if (p.is_relative()) p = base_dir / p;
  if (!std::filesystem::exists(p)) {
    throw ValidationError(where + ".signal: '" + s +
                          "' is neither a built-in signal nor an existing file");
  }
  return load_signal(p);
}

std::uint64_t seed_from_config(const json& doc, const std::string& where,
                               std::optional<std::uint64_t> seed_override) {
  if (seed_override) return *seed_override;
  const auto it = doc.find("seed");
  if (it == doc.end()) {
    throw ValidationError(where + ": a seed is required (config field 'seed' or --seed)");
  }
  if (!it->is_number_unsigned()) throw ParseError(where + ".seed: expected a nonnegative integer");
  return it->get<std::uint64_t>();
}

json penalty_json(const PenaltyConfig& p) { return {{"kappa", p.kappa}, {"alpha", p.alpha}}; }

}  // namespace

void ExperimentConfig::validate() const {
  signal.validate();
  if (replications < 1) throw std::invalid_argument("experiment: replications must be >= 1");
  if (segmenters.empty()) throw std::invalid_argument("experiment: no segmenters");
  for (const auto& s : segmenters) s.validate();
  penalty.validate();
  if (outliers && outliers->count > signal.n) {
    throw std::invalid_argument("experiment: more outliers than observations");
  }
  if (bins.hi <= bins.lo) throw std::invalid_argument("experiment: bins need lo < hi");
  if (!(xi >= 0.0)) throw std::invalid_argument("experiment: xi must be >= 0");
}

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir,
                                         std::optional<std::uint64_t> seed_override) {
  const std::string where = "experiment config";
  const json doc = detail::parse_json(text, where);
  detail::check_format(doc, "stepsel-experiment", where);
  ExperimentConfig cfg;
  cfg.signal = signal_from_config(doc, base_dir, where);
  if (doc.contains("outliers") && !doc["outliers"].is_null()) {
    const json& o = doc["outliers"];
    cfg.outliers = OutlierSpec{detail::get_count(o, "count", where + ".outliers"),
                               detail::get_real(o, "value", where + ".outliers")};
  }
  if (doc.contains("segmenters")) {
    const json& segs = doc["segmenters"];
    if (segs.is_string() && segs.get<std::string>() == "default") {
      cfg.segmenters = default_ensemble();
    } else if (segs.is_array()) {
      cfg.segmenters.clear();
      for (std::size_t i = 0; i < segs.size(); ++i) {
        cfg.segmenters.push_back(
            detail::segmenter_from_json(segs[i], where + ".segmenters[" + std::to_string(i) + "]"));
      }
    } else {
      throw ParseError(where + ".segmenters: expected \"default\" or an array");
    }
  }
  if (doc.contains("kappa")) cfg.penalty.kappa = detail::get_real(doc, "kappa", where);
  if (doc.contains("alpha")) cfg.penalty.alpha = detail::get_real(doc, "alpha", where);
  if (doc.contains("replications")) {
    cfg.replications = detail::get_count(doc, "replications", where);
  }
  if (doc.contains("bins")) {
    const json& b = doc["bins"];
    cfg.bins.lo = static_cast<int>(detail::get_real(b, "lo", where + ".bins"));
    cfg.bins.hi = static_cast<int>(detail::get_real(b, "hi", where + ".bins"));
  }
  if (doc.contains("xi")) cfg.xi = detail::get_real(doc, "xi", where);
  if (doc.contains("workers")) cfg.workers = detail::get_count(doc, "workers", where);
  cfg.seed = seed_from_config(doc, where, seed_override);
  try {
    cfg.validate();
  } catch (const std::logic_error& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ExpFamily& fam = cfg.signal.family;
  const StepFn truth = cfg.signal.truth();
  const std::size_t nr = cfg.replications;

  struct Slot {
    ReplicationRecord record;
    std::vector<std::string> diagnostics;
    OracleBound bound;
  };
  std::vector<Slot> slots(nr);

  parallel_for(nr, cfg.workers, [&](std::size_t r) {
    const auto rid = static_cast<std::uint64_t>(r);
    Rng data_rng = Rng::stream(cfg.seed, {rid, 0});
    std::vector<double> y = sample_series(cfg.signal, data_rng);
    if (cfg.outliers && cfg.outliers->count > 0) {
      Rng out_rng = Rng::stream(cfg.seed, {rid, 1});
      y = inject_outliers(y, *cfg.outliers, out_rng).series;
    }
    const std::uint64_t gen_seed = Rng::stream(cfg.seed, {rid, 2}).next_u64();
    const CandidateSet cs = generate_candidates(fam, y, cfg.segmenters, gen_seed);
    Slot& slot = slots[r];
    for (const auto& d : cs.diagnostics) {
      slot.diagnostics.push_back("replication " + std::to_string(r) + ": " + d);
    }
    if (cs.candidates.empty()) {
      std::string why;
      for (const auto& d : cs.diagnostics) why += "\n  " + d;
      throw ComputationError("replication " + std::to_string(r) +
                             " produced no candidate:" + why);
    }
    const SelectionResult sel = select(fam, y, cs.candidates, cfg.penalty);
    const StepFn& chosen = cs.candidates[sel.chosen];

    ReplicationRecord& rec = slot.record;
    rec.index = r;
    rec.true_segments = truth.segment_count();
    rec.methods.push_back(
        {"ES", pseudo_hellinger_risk(fam, truth, chosen), chosen.segment_count()});
    for (const auto& o : cs.outputs) {
      rec.methods.push_back(
          {o.fit.label(), pseudo_hellinger_risk(fam, truth, o.fit), o.fit.segment_count()});
    }
    rec.selected_generator = generator_of(chosen.label());
    slot.bound = oracle_bound_check(fam, truth, cs.candidates, sel.chosen, cfg.penalty, cfg.xi);
  });

  ExperimentResult res;
  Aggregator agg(cfg.bins);
  for (auto& slot : slots) {
    agg.add(slot.record);
    note_bound(res.bound, slot.bound);
    for (auto& d : slot.diagnostics) res.diagnostics.push_back(std::move(d));
    res.records.push_back(std::move(slot.record));
  }
  res.report = agg.finish();
  return res;
}

void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                              const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  std::ostringstream risk, freq, contrib, table;
  write_risk_csv(risk, result.report);
  write_freq_csv(freq, result.report);
  write_contribution_csv(contrib, result.report);
  write_table_csv(table, result.report);
  write_file(dir / "risk.csv", risk.str());
  write_file(dir / "freq.csv", freq.str());
  write_file(dir / "contribution.csv", contrib.str());
  write_file(dir / "table.csv", table.str());

  json m;
  m["format"] = "stepsel-manifest";
  m["version"] = 1;
  m["command"] = "experiment";
  m["stepsel_version"] = STEPSEL_VERSION;
  m["seed"] = cfg.seed;
  m["replications"] = cfg.replications;
  m["penalty"] = penalty_json(cfg.penalty);
  m["signal"] = detail::signal_to_json(cfg.signal);
  m["outliers"] = cfg.outliers ? json{{"count", cfg.outliers->count}, {"value", cfg.outliers->value}}
                               : json(nullptr);
  json segs = json::array();
  for (const auto& s : cfg.segmenters) segs.push_back(detail::segmenter_to_json(s));
  m["segmenters"] = std::move(segs);
  m["bins"] = {{"lo", cfg.bins.lo}, {"hi", cfg.bins.hi}};
  m["xi"] = cfg.xi;
  m["streams"] = "replication r: data (seed, r, 0), outliers (seed, r, 1), "
                 "generator base seed = first draw of (seed, r, 2); spec i uses (base, i)";
  m["oracle_bound"] = {{"checks", result.bound.checks},
                       {"violations", result.bound.violations},
                       {"min_margin", result.bound.min_margin}};
  m["diagnostics"] = result.diagnostics;
  m["outputs"] = {"risk.csv", "freq.csv", "contribution.csv", "table.csv"};
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

void CalibrationConfig::validate() const {
  if (settings.empty()) throw std::invalid_argument("calibration: no settings");
  if (kappas.empty()) throw std::invalid_argument("calibration: empty kappa grid");
  for (double k : kappas) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw std::invalid_argument("calibration: kappa values must be positive");
    }
  }
  if (replications < 1) throw std::invalid_argument("calibration: replications must be >= 1");
  if (k_max < 1) throw std::invalid_argument("calibration: k_max must be >= 1");
  if (!(alpha >= 1.0)) throw std::invalid_argument("calibration: alpha must be >= 1");
  for (const auto& s : settings) {
    s.validate();
    if (k_max > s.n) {
      throw std::invalid_argument("calibration: k_max exceeds length of '" + s.name + "'");
    }
  }
}

std::vector<double> kappa_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(from > 0.0) || !(to >= from)) {
    throw std::invalid_argument("kappa grid: need 0 < from <= to and step > 0");
  }
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) {
    // Round to 12 decimals so 0.01 + 6 * 0.01 prints as 0.07.
    out.push_back(std::round((from + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

CalibrationConfig parse_calibration_config(const std::string& text,
                                           const std::filesystem::path& base_dir,
                                           std::optional<std::uint64_t> seed_override) {
  const std::string where = "calibration config";
  const json doc = detail::parse_json(text, where);
  detail::check_format(doc, "stepsel-calibration", where);
  CalibrationConfig cfg;
  const json& settings = detail::require(doc, "settings", where);
  if (!settings.is_array()) throw ParseError(where + ".settings: expected an array");
  for (std::size_t i = 0; i < settings.size(); ++i) {
    json wrapper = {{"signal", settings[i]}};
    cfg.settings.push_back(
        signal_from_config(wrapper, base_dir, where + ".settings[" + std::to_string(i) + "]"));
  }
  if (doc.contains("kappas")) {
    const json& ks = doc["kappas"];
    if (!ks.is_array()) throw ParseError(where + ".kappas: expected an array");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      cfg.kappas.push_back(detail::as_real(ks[i], where + ".kappas[" + std::to_string(i) + "]"));
    }
  } else {
    const json& g = detail::require(doc, "kappa_grid", where);
    const std::string gw = where + ".kappa_grid";
    try {
      cfg.kappas = kappa_grid(detail::get_real(g, "from", gw), detail::get_real(g, "to", gw),
                              detail::get_real(g, "step", gw));
    } catch (const std::invalid_argument& e) {
      throw ValidationError(gw + ": " + e.what());
    }
  }
  if (doc.contains("replications")) {
    cfg.replications = detail::get_count(doc, "replications", where);
  }
  if (doc.contains("k_max")) cfg.k_max = detail::get_count(doc, "k_max", where);
  if (doc.contains("alpha")) cfg.alpha = detail::get_real(doc, "alpha", where);
  if (doc.contains("xi")) cfg.xi = detail::get_real(doc, "xi", where);
  if (doc.contains("workers")) cfg.workers = detail::get_count(doc, "workers", where);
  cfg.seed = seed_from_config(doc, where, seed_override);
  try {
    cfg.validate();
  } catch (const std::logic_error& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return cfg;
}

CalibrationResult calibrate_kappa(const CalibrationConfig& cfg) {
  cfg.validate();
  const std::size_t nk = cfg.kappas.size();
  const std::size_t nr = cfg.replications;
  CalibrationResult res;
  res.kappas = cfg.kappas;

  for (std::size_t si = 0; si < cfg.settings.size(); ++si) {
    const SignalSpec& setting = cfg.settings[si];
    const ExpFamily& fam = setting.family;
    const StepFn truth = setting.truth();
    // losses[r][k]: loss of the selection at kappa k in replication r.
    std::vector<std::vector<double>> losses(nr, std::vector<double>(nk));
    std::vector<BoundSummary> bounds(nr);

    parallel_for(nr, cfg.workers, [&](std::size_t r) {
      Rng rng = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(si), static_cast<std::uint64_t>(r)});
      const std::vector<double> y = sample_series(setting, rng);
      const std::vector<StepFn> cands = k_segment_dp(fam, y, cfg.k_max).fits;
      const TMatrix t = t_matrix(fam, y, cands);
      std::vector<double> cand_loss;
      for (const auto& c : cands) cand_loss.push_back(pseudo_hellinger_risk(fam, truth, c));
      for (std::size_t k = 0; k < nk; ++k) {
        const PenaltyConfig pc{cfg.kappas[k], cfg.alpha};
        std::vector<double> pens;
        for (const auto& c : cands) pens.push_back(penalty(pc, y.size(), c.segment_count()));
        const SelectionResult sel = select_from_matrix(t, pens);
        losses[r][k] = cand_loss[sel.chosen];
        OracleBound ob;
        ob.lhs = cand_loss[sel.chosen];
        double inf = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cands.size(); ++c) {
          inf = std::min(inf, kOracleC1 * cand_loss[c] + kOracleC2 * pens[c]);
        }
        ob.rhs = inf + kOracleC3 * (1.471 + cfg.xi);
        ob.margin = ob.rhs - ob.lhs;
        ob.satisfied = ob.lhs <= ob.rhs;
        note_bound(bounds[r], ob);
      }
    });

    CalibrationCurve curve;
    curve.setting = setting.name;
    for (std::size_t k = 0; k < nk; ++k) {
      Aggregator agg;
      for (std::size_t r = 0; r < nr; ++r) {
        agg.add({r, truth.segment_count(), {{"ES", losses[r][k], 0}}, {}});
      }
      const auto row = agg.finish().risk_of("ES");
      curve.risk.push_back(row.risk);
      curve.uncertainty.push_back(row.uncertainty);
    }
    curve.argmin = static_cast<std::size_t>(
        std::min_element(curve.risk.begin(), curve.risk.end()) - curve.risk.begin());
    res.curves.push_back(std::move(curve));
    for (const auto& b : bounds) {
      if (res.bound.checks == 0 || b.min_margin < res.bound.min_margin) {
        res.bound.min_margin = b.min_margin;
      }
      res.bound.checks += b.checks;
      res.bound.violations += b.violations;
    }
  }

  // Pooled choice: smallest average relative regret across settings.
  std::vector<double> pooled(nk, 0.0);
  for (const auto& c : res.curves) {
    const double best = c.risk[c.argmin];
    for (std::size_t k = 0; k < nk; ++k) {
      pooled[k] += best > 0.0 ? c.risk[k] / best : (c.risk[k] > 0.0 ? 1e300 : 1.0);
    }
  }
  res.recommended_kappa =
      cfg.kappas[static_cast<std::size_t>(std::min_element(pooled.begin(), pooled.end()) -
                                          pooled.begin())];
  return res;
}

void write_calibration_outputs(const std::filesystem::path& dir, const CalibrationConfig& cfg,
                               const CalibrationResult& result) {
  std::filesystem::create_directories(dir);
  std::string table = "setting,kappa,risk,uncertainty\n";
  std::string argmin = "setting,kappa_argmin,risk_min\n";
  for (const auto& c : result.curves) {
    for (std::size_t k = 0; k < result.kappas.size(); ++k) {
      table += c.setting + "," + fmt(result.kappas[k]) + "," + fmt(c.risk[k]) + "," +
               fmt(c.uncertainty[k]) + "\n";
    }
    argmin += c.setting + "," + fmt(result.kappas[c.argmin]) + "," + fmt(c.risk[c.argmin]) + "\n";
  }
  write_file(dir / "calibration.csv", table);
  write_file(dir / "calibration_argmin.csv", argmin);

  json m;
  m["format"] = "stepsel-manifest";
  m["version"] = 1;
  m["command"] = "calibrate";
  m["stepsel_version"] = STEPSEL_VERSION;
  m["seed"] = cfg.seed;
  m["replications"] = cfg.replications;
  m["k_max"] = cfg.k_max;
  m["alpha"] = cfg.alpha;
  m["kappas"] = cfg.kappas;
  json settings = json::array();
  for (const auto& s : cfg.settings) settings.push_back(detail::signal_to_json(s));
  m["settings"] = std::move(settings);
  m["streams"] = "setting s, replication r: data (seed, s, r)";
  m["recommended_kappa"] = result.recommended_kappa;
  m["oracle_bound"] = {{"checks", result.bound.checks},
                       {"violations", result.bound.violations},
                       {"min_margin", result.bound.min_margin}};
  m["outputs"] = {"calibration.csv", "calibration_argmin.csv"};
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace stepsel
