#include "stepsel/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json_codec.hpp"

namespace stepsel {

namespace detail {

namespace {

// 1-based line and column of a byte offset.
std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is one past the offending character.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    const auto colon = msg.find("]: ");
    if (colon != std::string::npos) msg = msg.substr(colon + 3);
    throw ParseError(what + ": " + location(text, at) + ": " + msg);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

double as_real(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer()) {
    throw ParseError(where + ": expected a nonnegative integer, got " + v.dump());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 9.0e15) return static_cast<std::size_t>(d);
  }
  throw ParseError(where + ": expected a nonnegative integer, got " + v.dump());
}

double get_real(const json& obj, const char* key, const std::string& where) {
  return as_real(require(obj, key, where), where + "." + key);
}

std::size_t get_count(const json& obj, const char* key, const std::string& where) {
  return as_count(require(obj, key, where), where + "." + key);
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ParseError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ParseError(where + "." + key + ": expected true or false");
  return it->get<bool>();
}

void check_format(const json& doc, const char* format, const std::string& where) {
  if (!doc.is_object()) throw ParseError(where + ": expected a JSON object at top level");
  const auto it = doc.find("format");
  if (it != doc.end() && (!it->is_string() || it->get<std::string>() != format)) {
    throw ParseError(where + ": format must be \"" + format + "\"");
  }
  const auto v = doc.find("version");
  if (v != doc.end() && (!v->is_number_integer() || v->get<int>() != 1)) {
    throw ParseError(where + ": unsupported version " + v->dump() + " (expected 1)");
  }
}

ExpFamily family_from_json(const json& doc, const std::string& where) {
  const std::string name = get_string(doc, "family", where);
  double sigma = 1.0;
  if (doc.contains("sigma")) sigma = get_real(doc, "sigma", where);
  try {
    return ExpFamily::from_name(name, sigma);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

void family_to_json(json& doc, const ExpFamily& fam) {
  doc["family"] = fam.name();
  if (fam.kind() == FamilyKind::Gaussian) doc["sigma"] = fam.sigma();
}

namespace {

std::optional<double> optional_beta(const json& obj, const std::string& where) {
  if (!obj.contains("beta") || obj["beta"].is_null()) return std::nullopt;
  return get_real(obj, "beta", where);
}

}  // namespace

SegmenterSpec segmenter_from_json(const json& obj, const std::string& where) {
  const std::string method = get_string(obj, "method", where);
  SegmenterSpec spec;
  if (method == "kseg") {
    spec.method = KSegDP{obj.contains("k_max") ? get_count(obj, "k_max", where) : 30};
  } else if (method == "pelt") {
    spec.method = Pelt{optional_beta(obj, where)};
  } else if (method == "binseg") {
    spec.method = BinSeg{obj.contains("k_max") ? get_count(obj, "k_max", where) : 20};
  } else if (method == "wbs") {
    WbsSsic m;
    if (obj.contains("intervals")) m.intervals = get_count(obj, "intervals", where);
    if (obj.contains("ssic_alpha")) m.ssic_alpha = get_real(obj, "ssic_alpha", where);
    spec.method = m;
  } else if (method == "robust") {
    const std::string loss = obj.contains("loss") ? get_string(obj, "loss", where) : "biweight";
    RobustDP m;
    if (loss == "huber") {
      m.loss = HuberLoss{obj.contains("delta") ? get_real(obj, "delta", where) : 1.345};
    } else if (loss == "biweight") {
      m.loss = BiweightLoss{obj.contains("c") ? get_real(obj, "c", where) : 4.685};
    } else {
      throw ParseError(where + ".loss: expected \"huber\" or \"biweight\", got \"" + loss + "\"");
    }
    m.beta = optional_beta(obj, where);
    spec.method = m;
  } else {
    throw ParseError(where + ".method: unknown method \"" + method +
                     "\" (expected kseg, pelt, binseg, wbs or robust)");
  }
  spec.use_vst = get_bool(obj, "use_vst", where, false);
  spec.refit_mle = get_bool(obj, "refit_mle", where, true);
  if (obj.contains("label")) spec.label = get_string(obj, "label", where);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return spec;
}

json segmenter_to_json(const SegmenterSpec& spec) {
  json out;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, KSegDP>) {
          out["method"] = "kseg";
          out["k_max"] = m.k_max;
        } else if constexpr (std::is_same_v<M, Pelt>) {
          out["method"] = "pelt";
          if (m.beta) out["beta"] = *m.beta;
        } else if constexpr (std::is_same_v<M, BinSeg>) {
          out["method"] = "binseg";
          out["k_max"] = m.k_max;
        } else if constexpr (std::is_same_v<M, WbsSsic>) {
          out["method"] = "wbs";
          out["intervals"] = m.intervals;
          out["ssic_alpha"] = m.ssic_alpha;
        } else {
          out["method"] = "robust";
          if (const auto* h = std::get_if<HuberLoss>(&m.loss)) {
            out["loss"] = "huber";
            out["delta"] = h->delta;
          } else {
            out["loss"] = "biweight";
            out["c"] = std::get<BiweightLoss>(m.loss).c;
          }
          if (m.beta) out["beta"] = *m.beta;
        }
      },
      spec.method);
  out["use_vst"] = spec.use_vst;
  out["refit_mle"] = spec.refit_mle;
  if (!spec.label.empty()) out["label"] = spec.label;
  return out;
}

SignalSpec signal_from_json(const json& doc, const std::string& where) {
  check_format(doc, "stepsel-signal", where);
  SignalSpec s;
  s.family = family_from_json(doc, where);
  s.n = get_count(doc, "n", where);
  s.name = doc.contains("name") ? get_string(doc, "name", where) : "signal";
  const json& cps = require(doc, "changepoints", where);
  const json& vals = require(doc, "values", where);
  if (!cps.is_array()) throw ParseError(where + ".changepoints: expected an array");
  if (!vals.is_array()) throw ParseError(where + ".values: expected an array");
  for (std::size_t i = 0; i < cps.size(); ++i) {
    s.changepoints.push_back(as_count(cps[i], where + ".changepoints[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < vals.size(); ++i) {
    s.seg_params.push_back(as_real(vals[i], where + ".values[" + std::to_string(i) + "]"));
  }
  try {
    s.validate();
  } catch (const std::logic_error& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return s;
}

json signal_to_json(const SignalSpec& spec) {
  json doc;
  doc["format"] = "stepsel-signal";
  doc["version"] = 1;
  doc["name"] = spec.name;
  family_to_json(doc, spec.family);
  doc["n"] = spec.n;
  doc["changepoints"] = spec.changepoints;
  doc["values"] = spec.seg_params;
  return doc;
}

}  // namespace detail

using detail::json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

CandidateFile parse_candidates(const std::string& text) {
  const json doc = detail::parse_json(text, "candidate file");
  const std::string top = "candidate file";
  detail::check_format(doc, "stepsel-candidates", top);
  CandidateFile out;
  out.family = detail::family_from_json(doc, top);
  out.n = detail::get_count(doc, "n", top);
  if (out.n == 0) throw ValidationError(top + ": n must be positive");
  const json& list = detail::require(doc, "candidates", top);
  if (!list.is_array()) throw ParseError(top + ".candidates: expected an array");
  if (list.empty()) throw ValidationError(top + ": candidate list is empty");

  for (std::size_t r = 0; r < list.size(); ++r) {
    const std::string where = "candidates[" + std::to_string(r) + "]";
    const json& rec = list[r];
    const std::string label = detail::get_string(rec, "label", where);
    const std::string named = where + " ('" + label + "')";
    const json& cps_j = detail::require(rec, "changepoints", named);
    const json& vals_j = detail::require(rec, "values", named);
    if (!cps_j.is_array()) throw ParseError(named + ".changepoints: expected an array");
    if (!vals_j.is_array()) throw ParseError(named + ".values: expected an array");
    std::vector<std::size_t> cps;
    for (std::size_t i = 0; i < cps_j.size(); ++i) {
      cps.push_back(detail::as_count(cps_j[i], named + ".changepoints[" + std::to_string(i) + "]"));
    }
    std::vector<double> vals;
    for (std::size_t i = 0; i < vals_j.size(); ++i) {
      vals.push_back(detail::as_real(vals_j[i], named + ".values[" + std::to_string(i) + "]"));
    }
    if (label.empty()) throw ValidationError(where + ": label must not be empty");
    try {
      StepFn f(Partition(out.n, std::move(cps)), std::move(vals), label);
      f.validate(out.family);
      for (std::size_t s = 1; s < f.segment_count(); ++s) {
        if (f.values()[s] == f.values()[s - 1]) {
          out.warnings.push_back(named + ": equal values on both sides of changepoint " +
                                 std::to_string(f.partition().changepoints()[s - 1]));
        }
      }
      out.candidates.push_back(std::move(f));
    } catch (const std::logic_error& e) {
      throw ValidationError(named + ": " + e.what());
    }
  }
  return out;
}

std::string dump_candidates(const ExpFamily& fam, std::span<const StepFn> candidates) {
  if (candidates.empty()) throw std::invalid_argument("dump_candidates: no candidates");
  json doc;
  doc["format"] = "stepsel-candidates";
  doc["version"] = 1;
  detail::family_to_json(doc, fam);
  doc["n"] = candidates.front().n();
  json list = json::array();
  for (const auto& c : candidates) {
    if (c.n() != candidates.front().n()) {
      throw std::invalid_argument("dump_candidates: candidates have different lengths");
    }
    list.push_back({{"label", c.label()},
                    {"changepoints", c.partition().changepoints()},
                    {"values", c.values()}});
  }
  doc["candidates"] = std::move(list);
  return doc.dump(2) + "\n";
}

CandidateFile import_candidates(const std::filesystem::path& path) {
  return parse_candidates(read_text_file(path));
}

void export_candidates(const std::filesystem::path& path, const ExpFamily& fam,
                       std::span<const StepFn> candidates) {
  write_text_file(path, dump_candidates(fam, candidates));
}

SignalSpec parse_signal(const std::string& text) {
  return detail::signal_from_json(detail::parse_json(text, "signal file"), "signal file");
}

std::string dump_signal(const SignalSpec& spec) {
  spec.validate();
  return detail::signal_to_json(spec).dump(2) + "\n";
}

SignalSpec load_signal(const std::filesystem::path& path) {
  return parse_signal(read_text_file(path));
}

void save_signal(const std::filesystem::path& path, const SignalSpec& spec) {
  write_text_file(path, dump_signal(spec));
}

SegmenterSpec parse_segmenter(const std::string& json_object) {
  return detail::segmenter_from_json(detail::parse_json(json_object, "segmenter"), "segmenter");
}

std::string dump_segmenter(const SegmenterSpec& spec) {
  return detail::segmenter_to_json(spec).dump();
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError("series CSV line " + std::to_string(line) + ": '" + field +
                     "' is not a number");
  }
  return v;
}

}  // namespace

Series parse_series_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  bool with_w = false;
  Series out;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      std::string h;
      for (char c : line) {
        if (c != ' ' && c != '\t') h += c;
      }
      if (h == "y") {
        with_w = false;
      } else if (h == "w,y") {
        with_w = true;
        out.w.emplace();
      } else {
        throw ParseError("series CSV line " + std::to_string(lineno) +
                         ": expected header 'y' or 'w,y', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    if (with_w) {
      const auto comma = line.find(',');
      if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
        throw ParseError("series CSV line " + std::to_string(lineno) +
                         ": expected two fields 'w,y'");
      }
      out.w->push_back(parse_number(trim(line.substr(0, comma)), lineno));
      out.y.push_back(parse_number(trim(line.substr(comma + 1)), lineno));
    } else {
      if (line.find(',') != std::string::npos) {
        throw ParseError("series CSV line " + std::to_string(lineno) +
                         ": expected a single field 'y'");
      }
      out.y.push_back(parse_number(line, lineno));
    }
  }
  if (!header_seen) throw ParseError("series CSV: missing header");
  if (out.y.empty()) throw ValidationError("series CSV: no observations");
  for (std::size_t i = 0; i < out.y.size(); ++i) {
    if (!std::isfinite(out.y[i])) {
      throw ValidationError("series CSV: observation " + std::to_string(i + 1) +
                            " is not finite");
    }
  }
  return out;
}

Series read_series_csv(const std::filesystem::path& path) {
  return parse_series_csv(read_text_file(path));
}

void write_series_csv(const std::filesystem::path& path, std::span<const double> y) {
  std::string text = "y\n";
  char buf[32];
  for (double v : y) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    text.append(buf, res.ptr);
    text += '\n';
  }
  write_text_file(path, text);
}

}  // namespace stepsel
