// Python bindings for the stepsel library.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "stepsel/errors.hpp"
#include "stepsel/evalkit.hpp"
#include "stepsel/experiment.hpp"
#include "stepsel/io.hpp"
#include "stepsel/segmenters.hpp"
#include "stepsel/selector.hpp"
#include "stepsel/simkit.hpp"
#include "stepsel/stepfn.hpp"

namespace py = pybind11;
using namespace stepsel;

namespace {

std::vector<SegmenterSpec> parse_specs(const std::optional<std::vector<std::string>>& specs,
                                       std::size_t kseg_k_max) {
  if (!specs) return default_ensemble(kseg_k_max);
  std::vector<SegmenterSpec> out;
  for (const auto& s : *specs) out.push_back(parse_segmenter(s));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Estimator selection for piecewise-constant exponential-family signals";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ComputationError>(m, "ComputationError", PyExc_RuntimeError);

  py::enum_<FamilyKind>(m, "FamilyKind")
      .value("Gaussian", FamilyKind::Gaussian)
      .value("Poisson", FamilyKind::Poisson)
      .value("Exponential", FamilyKind::Exponential)
      .value("Bernoulli", FamilyKind::Bernoulli);

  py::class_<ExpFamily>(m, "ExpFamily")
      .def_static("gaussian", &ExpFamily::gaussian, py::arg("sigma"))
      .def_static("poisson", &ExpFamily::poisson)
      .def_static("exponential", &ExpFamily::exponential)
      .def_static("bernoulli", &ExpFamily::bernoulli)
      .def_static("from_name", &ExpFamily::from_name, py::arg("name"), py::arg("sigma") = 1.0)
      .def_property_readonly("kind", &ExpFamily::kind)
      .def_property_readonly("sigma", &ExpFamily::sigma)
      .def_property_readonly("name", &ExpFamily::name)
      .def("u", &ExpFamily::u)
      .def("A", &ExpFamily::A)
      .def("__eq__", [](const ExpFamily& a, const ExpFamily& b) { return a == b; })
      .def("__repr__", [](const ExpFamily& f) { return "ExpFamily('" + f.name() + "')"; });

  m.def("log_density", &log_density, py::arg("family"), py::arg("g"), py::arg("y"));
  m.def("log_density_ratio", &log_density_ratio, py::arg("family"), py::arg("g1"), py::arg("g2"),
        py::arg("y"));
  m.def("hellinger_sq", &hellinger_sq, py::arg("family"), py::arg("g1"), py::arg("g2"));
  m.def(
      "mle", [](const ExpFamily& f, const std::vector<double>& y) { return mle(f, y); },
      py::arg("family"), py::arg("y"));

  py::class_<StepFn>(m, "StepFn")
      .def(py::init([](std::size_t n, std::vector<std::size_t> changepoints,
                       std::vector<double> values, std::string label) {
             return StepFn(Partition(n, std::move(changepoints)), std::move(values),
                           std::move(label));
           }),
           py::arg("n"), py::arg("changepoints"), py::arg("values"), py::arg("label") = "")
      .def_property_readonly("n", &StepFn::n)
      .def_property_readonly("changepoints",
                             [](const StepFn& s) { return s.partition().changepoints(); })
      .def_property_readonly("values", &StepFn::values)
      .def_property("label", &StepFn::label, &StepFn::set_label)
      .def_property_readonly("segment_count", &StepFn::segment_count)
      .def("eval_at", &StepFn::eval_at, py::arg("i"))
      .def("dense", &StepFn::dense)
      .def("same_function", &StepFn::same_function)
      .def("__repr__", [](const StepFn& s) {
        return "StepFn(n=" + std::to_string(s.n()) + ", segments=" +
               std::to_string(s.segment_count()) + ", label='" + s.label() + "')";
      });

  m.def("delta_weight", &delta_weight, py::arg("n"), py::arg("k"));

  py::class_<PenaltyConfig>(m, "PenaltyConfig")
      .def(py::init([](double kappa, double alpha) { return PenaltyConfig{kappa, alpha}; }),
           py::arg("kappa") = 0.08, py::arg("alpha") = 1.0)
      .def_readwrite("kappa", &PenaltyConfig::kappa)
      .def_readwrite("alpha", &PenaltyConfig::alpha);

  m.def("penalty", &penalty, py::arg("config"), py::arg("n"), py::arg("k"));
  m.def(
      "t_statistic",
      [](const ExpFamily& f, const std::vector<double>& y, const StepFn& a, const StepFn& b) {
        return t_statistic(f, y, a, b);
      },
      py::arg("family"), py::arg("y"), py::arg("a"), py::arg("b"));

  py::class_<SelectionResult>(m, "SelectionResult")
      .def_readonly("chosen", &SelectionResult::chosen)
      .def_readonly("upsilon", &SelectionResult::upsilon)
      .def_readonly("penalties", &SelectionResult::penalties)
      .def_readonly("ties", &SelectionResult::ties)
      .def_property_readonly("t_matrix", [](const SelectionResult& r) {
        std::vector<std::vector<double>> rows(r.t_matrix.size());
        for (std::size_t a = 0; a < rows.size(); ++a) {
          for (std::size_t b = 0; b < rows.size(); ++b) rows[a].push_back(r.t_matrix(a, b));
        }
        return rows;
      });

  m.def(
      "select",
      [](const ExpFamily& f, const std::vector<double>& y, const std::vector<StepFn>& cands,
         const PenaltyConfig& cfg) { return select(f, y, cands, cfg); },
      py::arg("family"), py::arg("y"), py::arg("candidates"), py::arg("config") = PenaltyConfig{});

  m.def(
      "k_segment_dp",
      [](const ExpFamily& f, const std::vector<double>& y, std::size_t k_max) {
        const DpPath p = k_segment_dp(f, y, k_max);
        return py::make_tuple(p.fits, p.costs);
      },
      py::arg("family"), py::arg("y"), py::arg("k_max"),
      "Optimal k-segment fits for k = 1..k_max and their costs, as (fits, costs).");
  m.def(
      "pelt",
      [](const ExpFamily& f, const std::vector<double>& y, double beta) {
        const PenalizedFit p = pelt(f, y, beta);
        return py::make_tuple(p.fit, p.cost, p.objective);
      },
      py::arg("family"), py::arg("y"), py::arg("beta"),
      "Penalized optimal partitioning, as (fit, cost, objective).");
  m.def(
      "vst_transform",
      [](const ExpFamily& f, const std::vector<double>& y) { return vst_transform(f, y); },
      py::arg("family"), py::arg("y"));
  m.def(
      "mad_sigma", [](const std::vector<double>& y) { return mad_sigma(y).sigma; }, py::arg("y"));

  m.def(
      "generate_candidates",
      [](const ExpFamily& f, const std::vector<double>& y,
         const std::optional<std::vector<std::string>>& specs, std::uint64_t seed,
         std::size_t kseg_k_max) {
        const auto parsed = parse_specs(specs, kseg_k_max);
        const CandidateSet set = generate_candidates(f, y, parsed, seed);
        return py::make_tuple(set.candidates, set.diagnostics);
      },
      py::arg("family"), py::arg("y"), py::arg("specs") = py::none(), py::arg("seed") = 0,
      py::arg("kseg_k_max") = 15,
      "Runs the segmenter specs (JSON objects; default ensemble when None) and returns "
      "(deduplicated candidates, diagnostics).");

  m.def("builtin_signal_names", &builtin_signal_names);
  m.def(
      "sample_signal",
      [](const std::string& name, std::uint64_t seed) {
        const SignalSpec spec = builtin_signal(name);
        Rng rng = Rng::stream(seed, {0, 0});
        return py::make_tuple(sample_series(spec, rng), spec.truth());
      },
      py::arg("name"), py::arg("seed"),
      "One draw of a builtin signal, as (series, truth); same stream as replication 0.");
  m.def(
      "pseudo_hellinger_risk",
      [](const ExpFamily& f, const StepFn& truth, const StepFn& est) {
        return pseudo_hellinger_risk(f, truth, est);
      },
      py::arg("family"), py::arg("truth"), py::arg("estimate"));

  m.def(
      "run_experiment",
      [](const std::string& config_json, std::uint64_t seed,
         const std::optional<std::string>& out_dir) {
        const ExperimentConfig cfg = parse_experiment_config(config_json, ".", seed);
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg);
        }
        if (out_dir) write_experiment_outputs(*out_dir, cfg, res);
        py::dict risk;
        for (const auto& row : res.report.risk) {
          risk[py::str(row.method)] = py::make_tuple(row.risk, row.uncertainty);
        }
        py::dict contribution;
        for (const auto& c : res.report.contribution) contribution[py::str(c.generator)] = c.freq;
        py::dict out;
        out["risk"] = risk;
        out["contribution"] = contribution;
        out["es_freq"] = res.report.freq_of("ES").freq;
        out["bound_violations"] = res.bound.violations;
        out["diagnostics"] = res.diagnostics;
        return out;
      },
      py::arg("config_json"), py::arg("seed"), py::arg("out_dir") = py::none(),
      "Runs an experiment from config JSON text; returns risk, contribution and ES "
      "frequencies.");

  m.attr("__version__") = STEPSEL_VERSION;
}
