#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coas/analysis.hpp"
#include "coas/closedform.hpp"
#include "coas/cluster.hpp"
#include "coas/error.hpp"
#include "coas/fixtures.hpp"
#include "coas/io.hpp"
#include "coas/model.hpp"
#include "coas/montecarlo.hpp"

namespace py = pybind11;
using namespace coas;

namespace {

Domain to_domain(const std::vector<std::pair<double, double>>& d) {
  Domain out;
  for (const auto& [lo, hi] : d) out.push_back({lo, hi});
  return out;
}

std::vector<std::pair<double, double>> from_domain(const Domain& d) {
  std::vector<std::pair<double, double>> out;
  for (const auto& iv : d) out.emplace_back(iv.lo, iv.hi);
  return out;
}

InputPrior prior_from_dict(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return io::prior_from_json(io::json::parse(text));
}

py::dict decomposition_dict(const CoActiveDecomposition& d) {
  py::dict out;
  out["V"] = d.V;
  out["eigvals"] = d.eigvals;
  out["eigvecs"] = d.eigvecs;
  out["contributions"] = d.contributions;
  out["concordance"] = d.concordance;
  out["t_k"] = d.t_k;
  out["t_l"] = d.t_l;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Co-active subspace analysis of model pairs";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ConstantFunctionError>(m, "ConstantFunctionError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<InputPrior>(m, "InputPrior")
      .def_static("uniform_box", &InputPrior::uniform_box, py::arg("p"), py::arg("lo") = 0.0,
                  py::arg("hi") = 1.0)
      .def_static("from_dict", &prior_from_dict,
                  "Build from {'p': .., 'dims': [{'type': 'uniform', 'lo', 'hi'} | "
                  "{'type': 'normal', 'mean', 'sd', 'trunc_lo'?, 'trunc_hi'?}]}")
      .def_property_readonly("p", &InputPrior::p)
      .def("covariance", &InputPrior::covariance);

  py::class_<MarsSurrogate>(m, "MarsSurrogate")
      .def_property_readonly("p", &MarsSurrogate::p)
      .def_property_readonly("label", &MarsSurrogate::label)
      .def_property_readonly("intercept", &MarsSurrogate::intercept)
      .def_property_readonly("n_terms", [](const MarsSurrogate& s) { return s.terms().size(); })
      .def_property_readonly("domain", [](const MarsSurrogate& s) { return from_domain(s.domain()); })
      .def("evaluate", &MarsSurrogate::evaluate, py::arg("x"))
      .def("evaluate_rows", &MarsSurrogate::evaluate_rows, py::arg("X"))
      .def("gradient", &MarsSurrogate::gradient, py::arg("x"))
      .def("to_json", [](const MarsSurrogate& s) { return io::model_to_json(s).dump(); })
      .def_static("from_json",
                  [](const std::string& text) { return io::model_from_json(io::json::parse(text)); })
      .def("__eq__", &MarsSurrogate::operator==);

  m.def(
      "fit",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
         const std::vector<std::pair<double, double>>& domain, int max_terms, int max_degree,
         double penalty, const std::string& label) {
        FitConfig cfg;
        cfg.max_terms = max_terms;
        cfg.max_degree = max_degree;
        cfg.penalty = penalty;
        const auto r = fit(X, y, to_domain(domain), cfg, label);
        py::dict report;
        report["r2"] = r.r2;
        report["rmse"] = r.rmse;
        report["gcv"] = r.gcv;
        report["constant_response"] = r.constant_response;
        return py::make_tuple(r.model, report);
      },
      py::arg("X"), py::arg("y"), py::arg("domain"), py::arg("max_terms") = 50,
      py::arg("max_degree") = 3, py::arg("penalty") = 3.0, py::arg("label") = "",
      "Fit a MARS surrogate; returns (model, report).");

  m.def(
      "fit_ensemble",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
         const std::vector<std::pair<double, double>>& domain, int B, std::uint64_t seed,
         int max_terms, int max_degree) {
        FitConfig cfg;
        cfg.max_terms = max_terms;
        cfg.max_degree = max_degree;
        return fit_ensemble(X, y, to_domain(domain), cfg, B, seed).members();
      },
      py::arg("X"), py::arg("y"), py::arg("domain"), py::arg("B"), py::arg("seed") = 0,
      py::arg("max_terms") = 50, py::arg("max_degree") = 3);

  m.def(
      "lhs_design",
      [](int n, const std::vector<std::pair<double, double>>& domain, std::uint64_t seed) {
        return lhs_design(n, static_cast<int>(domain.size()), to_domain(domain), seed);
      },
      py::arg("n"), py::arg("domain"), py::arg("seed") = 0);

  m.def(
      "cmat",
      [](const MarsSurrogate& a, const MarsSurrogate& b, const InputPrior& prior, bool modified) {
        return (modified ? cmat_modified(a, b, prior) : cmat(a, b, prior)).entries;
      },
      py::arg("a"), py::arg("b"), py::arg("prior"), py::arg("modified") = false);
  m.def("cotrace", &cotrace, py::arg("a"), py::arg("b"), py::arg("prior"));
  m.def("expected_gradient", &expected_gradient, py::arg("model"), py::arg("prior"));

  m.def(
      "mc_cmat",
      [](const py::object& fk, const py::object& fl, const InputPrior& prior, long long B,
         std::uint64_t seed, const std::vector<std::pair<double, double>>& domain) {
        auto sampled = [&](const py::object& f) {
          if (py::isinstance<MarsSurrogate>(f)) {
            return SampledFunction::from_surrogate(f.cast<MarsSurrogate>());
          }
          auto fn = f.cast<std::function<double(const Eigen::VectorXd&)>>();
          return SampledFunction::from_callable(
              [fn](const Eigen::VectorXd& x) {
                py::gil_scoped_acquire gil;
                return fn(x);
              },
              to_domain(domain), "callable");
        };
        const auto est = mc_cmat(sampled(fk), sampled(fl), prior, B, seed, 1);
        return py::make_tuple(est.estimate.entries, est.se);
      },
      py::arg("fk"), py::arg("fl"), py::arg("prior"), py::arg("B"), py::arg("seed") = 0,
      py::arg("domain") = std::vector<std::pair<double, double>>{},
      "Monte Carlo estimate; returns (entries, standard_errors). Callables need `domain`.");

  m.def("symmetrize",
        [](const Eigen::MatrixXd& ckl, std::optional<Eigen::MatrixXd> clk) {
          return symmetrize(ckl, clk);
        },
        py::arg("ckl"), py::arg("clk") = py::none());
  m.def("concordance", &concordance, py::arg("tkl"), py::arg("tk"), py::arg("tl"),
        py::arg("tol") = 1e-12);
  m.def("discordance", &discordance, py::arg("kappa"));
  m.def(
      "decompose",
      [](const Eigen::MatrixXd& V, double tk, double tl) {
        return decomposition_dict(decompose(V, tk, tl));
      },
      py::arg("V"), py::arg("tk"), py::arg("tl"));
  m.def(
      "activity_scores",
      [](const Eigen::MatrixXd& V, double tk, double tl, int q) {
        const auto s = activity_scores(decompose(V, tk, tl), q);
        return py::make_tuple(s.signed_scores, s.unsigned_scores);
      },
      py::arg("V"), py::arg("tk"), py::arg("tl"), py::arg("q"),
      "Returns (signed, unsigned) scores of the decomposition of V.");
  m.def("poincare_bound", &poincare_bound, py::arg("c_self"), py::arg("sigma"), py::arg("basis"));
  m.def(
      "select_dim",
      [](const Eigen::VectorXd& eigvals, double tau) {
        const auto s = select_dim(eigvals, tau);
        return py::make_tuple(s.r, s.max_gap_ratio, s.warning);
      },
      py::arg("eigvals"), py::arg("tau"));

  m.def(
      "mds_embed",
      [](const Eigen::MatrixXd& D, int dims, std::uint64_t seed) {
        const auto e = mds_embed(D, dims, seed);
        py::dict out;
        out["points"] = e.points;
        out["stress"] = e.stress;
        out["stress_history"] = e.stress_history;
        out["iterations"] = e.iterations;
        return out;
      },
      py::arg("D"), py::arg("dims") = 2, py::arg("seed") = 0);
  m.def("model_centers", &model_centers, py::arg("points"), py::arg("membership"), py::arg("K"));

  m.def("poly", &fixtures::poly, py::arg("x"), py::arg("beta"));
  m.def("piston", &fixtures::piston, py::arg("unit_x"), py::arg("p0") = 90000.0,
        py::arg("ta") = 284.0);
  m.attr("__version__") = io::kToolVersion;
}
