#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "stepsel/errors.hpp"
#include "stepsel/io.hpp"

using namespace stepsel;
using Catch::Matchers::ContainsSubstring;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "stepsel_test_io";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string candidates_doc(const std::string& records) {
  return R"({"format": "stepsel-candidates", "version": 1, "family": "poisson", "n": 10,
  "candidates": [)" +
         records + "]}";
}

template <class E>
std::string message_of(const std::string& text) {
  try {
    parse_candidates(text);
  } catch (const E& e) {
    return e.what();
  }
  return "no exception";
}

}  // namespace

TEST_CASE("candidate files round-trip exactly") {
  Rng rng(1);
  std::vector<StepFn> cands;
  for (int c = 0; c < 6; ++c) {
    std::vector<std::size_t> cps;
    for (std::size_t t = 2; t <= 40; ++t) {
      if (rng.uniform() < 0.15) cps.push_back(t);
    }
    std::vector<double> vals(cps.size() + 1);
    for (double& v : vals) v = std::log(0.1 + 20.0 * rng.uniform());
    cands.emplace_back(Partition(40, cps), vals, "gen" + std::to_string(c) + "/k=" +
                                                     std::to_string(cps.size() + 1));
  }
  const auto path = scratch_dir() / "cands.json";
  export_candidates(path, ExpFamily::poisson(), cands);
  const CandidateFile back = import_candidates(path);
  CHECK(back.family == ExpFamily::poisson());
  CHECK(back.n == 40);
  REQUIRE(back.candidates.size() == cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    CHECK(back.candidates[i].same_function(cands[i]));
    CHECK(back.candidates[i].label() == cands[i].label());
  }
  CHECK(dump_candidates(ExpFamily::poisson(), back.candidates) ==
        dump_candidates(ExpFamily::poisson(), cands));

  const std::vector<StepFn> g{StepFn(Partition(3), {0.1}, "x")};
  const auto gback = parse_candidates(dump_candidates(ExpFamily::gaussian(2.5), g));
  CHECK(gback.family == ExpFamily::gaussian(2.5));
}

TEST_CASE("candidate file errors") {
  CHECK_THAT(message_of<ValidationError>(candidates_doc("")), ContainsSubstring("empty"));
  CHECK_THAT(message_of<ValidationError>(candidates_doc(
                 R"({"label": "bad", "changepoints": [6, 4], "values": [0, 1, 2]})")),
             ContainsSubstring("candidates[0] ('bad')"));
  CHECK_THAT(message_of<ValidationError>(candidates_doc(
                 R"({"label": "ok", "changepoints": [], "values": [0]},
                    {"label": "short", "changepoints": [4], "values": [0]})")),
             ContainsSubstring("candidates[1] ('short')"));
  CHECK_THAT(message_of<ValidationError>(candidates_doc(
                 R"({"label": "range", "changepoints": [11], "values": [0, 1]})")),
             ContainsSubstring("range"));
  CHECK_THAT(message_of<ParseError>(candidates_doc(
                 R"({"label": "neg", "changepoints": [-3], "values": [0, 1]})")),
             ContainsSubstring("candidates[0] ('neg').changepoints[0]"));
  CHECK_THAT(message_of<ParseError>(candidates_doc(
                 R"({"label": "str", "changepoints": [], "values": ["x"]})")),
             ContainsSubstring("values[0]"));
  CHECK_THAT(message_of<ParseError>(candidates_doc(R"({"changepoints": [], "values": [0]})")),
             ContainsSubstring("label"));
  // Out-of-domain value for the exponential family.
  const std::string expo = R"({"family": "exponential", "n": 3,
    "candidates": [{"label": "neg-rate", "changepoints": [], "values": [-1.0]}]})";
  CHECK_THAT(message_of<ValidationError>(expo), ContainsSubstring("neg-rate"));
  // Syntax errors carry a line and column.
  CHECK_THAT(message_of<ParseError>("{\n  \"family\": \"poisson\",\n  \"n\": 10,,\n}"),
             ContainsSubstring("line 3"));
  CHECK_THAT(message_of<ParseError>(R"({"format": "other", "family": "poisson", "n": 1,
    "candidates": []})"),
             ContainsSubstring("format"));
  CHECK_THAT(message_of<ParseError>(R"({"version": 2, "family": "poisson", "n": 1,
    "candidates": []})"),
             ContainsSubstring("version"));
  CHECK_THAT(message_of<ValidationError>(R"({"family": "gamma", "n": 1, "candidates": []})"),
             ContainsSubstring("gamma"));
  CHECK_THROWS_AS(import_candidates(scratch_dir() / "missing.json"), std::runtime_error);
}

TEST_CASE("equal values across a changepoint produce a warning") {
  const auto file = parse_candidates(candidates_doc(
      R"({"label": "flat", "changepoints": [5], "values": [0.5, 0.5]})"));
  REQUIRE(file.warnings.size() == 1);
  CHECK_THAT(file.warnings[0], ContainsSubstring("flat"));
  CHECK(file.candidates.size() == 1);
}

TEST_CASE("signal files") {
  const auto fms = builtin_signal("fms-type");
  const auto path = scratch_dir() / "fms.json";
  save_signal(path, fms);
  const SignalSpec back = load_signal(path);
  CHECK(back.n == fms.n);
  CHECK(back.changepoints == fms.changepoints);
  CHECK(back.seg_params == fms.seg_params);
  CHECK(back.name == fms.name);
  CHECK(back.family == fms.family);

  CHECK_THROWS_AS(parse_signal(R"({"family": "poisson", "n": 5, "changepoints": [3],
    "values": [1.0]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_signal(R"({"family": "poisson", "n": 5, "changepoints": [3]})"),
                  ParseError);
  const auto g = parse_signal(R"({"family": "gaussian", "sigma": 0.5, "n": 4,
    "changepoints": [3], "values": [0, 1]})");
  CHECK(g.family.sigma() == 0.5);
  CHECK(g.name == "signal");
}

TEST_CASE("segmenter specs round-trip") {
  const std::vector<SegmenterSpec> specs{
      {KSegDP{12}, false, true, {}},
      {Pelt{3.5}, true, false, "p"},
      {Pelt{}, true, true, {}},
      {BinSeg{7}, true, true, {}},
      {WbsSsic{100, 1.2}, true, true, {}},
      {RobustDP{HuberLoss{2.0}, 1.5}, true, true, {}},
      {RobustDP{BiweightLoss{}, {}}, true, true, {}},
  };
  for (const auto& s : specs) {
    const auto back = parse_segmenter(dump_segmenter(s));
    CHECK(dump_segmenter(back) == dump_segmenter(s));
    CHECK(back.effective_label() == s.effective_label());
  }
  const auto robust = parse_segmenter(R"({"method": "robust", "loss": "huber", "use_vst": true})");
  CHECK(std::get<HuberLoss>(std::get<RobustDP>(robust.method).loss).delta == 1.345);
  CHECK(robust.effective_label() == "robust-huber^t");
  CHECK_THROWS_AS(parse_segmenter(R"({"method": "fpop"})"), ParseError);
  CHECK_THROWS_AS(parse_segmenter(R"({"method": "robust", "loss": "cauchy"})"), ParseError);
  CHECK_THROWS_AS(parse_segmenter(R"({"method": "kseg", "k_max": 0})"), ValidationError);
  CHECK_THROWS_AS(parse_segmenter(R"({"method": "pelt", "use_vst": "yes"})"), ParseError);
  CHECK_THROWS_AS(parse_segmenter(R"({"method": "kseg", "k_max": 2.5})"), ParseError);
}

TEST_CASE("series CSV") {
  const auto s = parse_series_csv("y\n1\n2.5\n\n-3e2\n");
  CHECK(s.y == std::vector<double>{1.0, 2.5, -300.0});
  CHECK_FALSE(s.w.has_value());

  const auto sw = parse_series_csv("w, y\n0, 4\n0.5,6\n");
  REQUIRE(sw.w.has_value());
  CHECK(*sw.w == std::vector<double>{0.0, 0.5});
  CHECK(sw.y == std::vector<double>{4.0, 6.0});

  CHECK_THROWS_AS(parse_series_csv("x\n1\n"), ParseError);
  CHECK_THROWS_AS(parse_series_csv(""), ParseError);
  CHECK_THROWS_AS(parse_series_csv("y\n"), ValidationError);
  CHECK_THROWS_AS(parse_series_csv("y\ninf\n"), ValidationError);
  try {
    parse_series_csv("y\n1\nabc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK_THAT(e.what(), ContainsSubstring("line 3"));
  }
  CHECK_THROWS_AS(parse_series_csv("w,y\n1\n"), ParseError);
  CHECK_THROWS_AS(parse_series_csv("y\n1,2\n"), ParseError);

  const std::vector<double> y{0.1, 1.0 / 3.0, 1e-300, 12345678.9};
  const auto path = scratch_dir() / "series.csv";
  write_series_csv(path, y);
  CHECK(read_series_csv(path).y == y);
}
