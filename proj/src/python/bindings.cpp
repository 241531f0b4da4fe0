#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "honest_ate/alt_estimators.hpp"
#include "honest_ate/errors.hpp"
#include "honest_ate/report.hpp"
#include "honest_ate/estimator.hpp"
#include "honest_ate/modulus_qp.hpp"
#include "honest_ate/serialize.hpp"
#include "honest_ate/stats.hpp"
#include "honest_ate/variance.hpp"

namespace py = pybind11;
using namespace honest_ate;

namespace {

Sample make_sample(const Eigen::MatrixXd& x, const Eigen::VectorXi& d,
                   std::optional<Eigen::VectorXd> y) {
  Sample s;
  s.covariates = x;
  s.treatments = d;
  s.outcomes = std::move(y);
  validate_sample(s);
  return s;
}

NormSpec make_norm(const Eigen::VectorXd& diag, const std::string& p) {
  PNorm e = p == "1" ? PNorm::one : (p == "2" ? PNorm::two : PNorm::inf);
  return NormSpec::diagonal(diag, e);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Minimax-linear treatment-effect estimation with honest CIs";

  py::register_exception<Error>(m, "HonestAteError");

  py::class_<Sample>(m, "Sample")
      .def(py::init(&make_sample), py::arg("covariates"), py::arg("treatments"),
           py::arg("outcomes") = std::nullopt)
      .def_readonly("covariates", &Sample::covariates)
      .def_readonly("treatments", &Sample::treatments)
      .def_property_readonly("outcomes",
                             [](const Sample& s) { return s.outcomes; })
      .def_property_readonly("n", &Sample::n)
      .def_property_readonly("n_treated", &Sample::n_treated)
      .def_property_readonly("n_control", &Sample::n_control);

  py::class_<NormSpec>(m, "NormSpec")
      .def(py::init(&make_norm), py::arg("diag"), py::arg("p") = "2")
      .def_readonly("weight_matrix_half", &NormSpec::weight_matrix_half);

  py::class_<LipschitzSpec>(m, "LipschitzSpec")
      .def(py::init([](double c, const NormSpec& norm,
                       std::vector<int> monotone) {
             return LipschitzSpec{c, norm, std::move(monotone)};
           }),
           py::arg("constant"), py::arg("norm"),
           py::arg("monotone_indices") = std::vector<int>{})
      .def_readonly("constant", &LipschitzSpec::constant);

  py::class_<TargetWeights>(m, "TargetWeights")
      .def_readonly("weights", &TargetWeights::weights);
  m.def(
      "target_weights",
      [](const std::string& kind, const Sample& sample,
         std::optional<Eigen::VectorXd> custom) {
        TargetKind k = kind == "cate"
                           ? TargetKind::cate
                           : (kind == "catt" ? TargetKind::catt
                                             : TargetKind::custom);
        return target_weights(k, sample, custom ? &*custom : nullptr);
      },
      py::arg("kind"), py::arg("sample"), py::arg("custom") = std::nullopt);

  py::class_<SolutionPath, std::shared_ptr<SolutionPath>>(m, "SolutionPath")
      .def_property_readonly(
          "knot_mus",
          [](const SolutionPath& p) {
            std::vector<double> mus;
            for (const auto& k : p.knots()) mus.push_back(k.mu);
            return mus;
          })
      .def_property_readonly("reached_terminal", &SolutionPath::reached_terminal)
      .def("to_json", [](const SolutionPath& p) { return path_to_json(p).dump(); });

  m.def(
      "trace_path",
      [](const Sample& sample, const NormSpec& norm, const std::string& target,
         double sigma2_control, double sigma2_treated) {
        TargetKind k = target == "cate" ? TargetKind::cate : TargetKind::catt;
        LipschitzSpec unit{1.0, norm, {}};
        return std::make_shared<SolutionPath>(
            trace_path(sample, unit, target_weights(k, sample),
                       VarianceSpec::per_arm(sigma2_control, sigma2_treated),
                       PathOptions{}));
      },
      py::arg("sample"), py::arg("norm"), py::arg("target") = "cate",
      py::arg("sigma2_control") = 1.0, py::arg("sigma2_treated") = 1.0);

  py::class_<LinearEstimate>(m, "LinearEstimate")
      .def_readonly("weights", &LinearEstimate::weights)
      .def_readonly("estimate", &LinearEstimate::estimate)
      .def_readonly("maxbias", &LinearEstimate::maxbias)
      .def_readonly("sd", &LinearEstimate::sd)
      .def_readonly("delta", &LinearEstimate::delta)
      .def_readonly("provenance", &LinearEstimate::provenance);

  m.def(
      "weights_at",
      [](std::shared_ptr<SolutionPath> path, double mu, double c,
         std::optional<Eigen::VectorXd> y) {
        return weights_at(*path, mu, c, y);
      },
      py::arg("path"), py::arg("mu"), py::arg("C") = 1.0,
      py::arg("outcomes") = std::nullopt);

  m.def(
      "tune",
      [](std::shared_ptr<SolutionPath> path, const std::string& which, double c,
         double alpha, double beta, std::optional<Eigen::VectorXd> y) {
        TuneResult t =
            tune(*path, criterion_from_string(which), c, alpha, beta, y);
        return py::make_tuple(t.delta_star, t.estimate);
      },
      py::arg("path"), py::arg("criterion"), py::arg("C") = 1.0,
      py::arg("alpha") = 0.05, py::arg("beta") = 0.8,
      py::arg("outcomes") = std::nullopt);

  m.def("critical_value", &critical_value, py::arg("b"), py::arg("alpha"),
        "1-alpha quantile of |N(b,1)|");
  m.def("normal_quantile", &normal_quantile);

  m.def(
      "efficiency_bounds",
      [](std::shared_ptr<SolutionPath> path, double c, double alpha,
         double beta) {
        EfficiencyBounds e = efficiency_bounds(*path, c, alpha, beta);
        return py::make_tuple(e.oneside, e.flci);
      },
      py::arg("path"), py::arg("C") = 1.0, py::arg("alpha") = 0.05,
      py::arg("beta") = 0.8);

  m.def(
      "matching_weights",
      [](const Sample& sample, const NormSpec& norm, int m,
         const std::string& target, const std::string& ties) {
        TargetKind k = target == "cate" ? TargetKind::cate : TargetKind::catt;
        DistanceMatrices dist = cross_distances(sample, norm);
        return matching_weights(sample, dist, m, target_weights(k, sample),
                                ties == "average" ? TiePolicy::average
                                                  : TiePolicy::lowest_index);
      },
      py::arg("sample"), py::arg("norm"), py::arg("M") = 1,
      py::arg("target") = "cate", py::arg("ties") = "lowest");

  m.def(
      "difference_in_means",
      [](const Sample& sample) { return difference_in_means(sample); },
      py::arg("sample"));

  m.def(
      "worst_case_bias",
      [](const Eigen::VectorXd& weights, const Sample& sample,
         const LipschitzSpec& lipschitz, const std::string& target) {
        TargetKind k = target == "cate" ? TargetKind::cate : TargetKind::catt;
        return worst_case_bias_lp(weights, sample, lipschitz,
                                  target_weights(k, sample));
      },
      py::arg("weights"), py::arg("sample"), py::arg("lipschitz"),
      py::arg("target") = "cate");

  m.def(
      "solve_modulus_qp",
      [](const Sample& sample, const LipschitzSpec& lipschitz,
         const std::string& target, const Eigen::VectorXd& sigma2_obs,
         double delta) {
        TargetKind k = target == "cate" ? TargetKind::cate : TargetKind::catt;
        ModulusSolution sol =
            solve_modulus_qp(sample, lipschitz, target_weights(k, sample),
                             VarianceSpec::per_observation(sigma2_obs), delta);
        return py::make_tuple(sol.f, sol.objective);
      },
      py::arg("sample"), py::arg("lipschitz"), py::arg("target"),
      py::arg("sigma2_obs"), py::arg("delta"));

  m.def(
      "nn_variance",
      [](const Sample& sample, int j, const NormSpec& norm) {
        VarianceEstimate v = nn_variance(sample, j, norm);
        return py::make_tuple(v.u2_hat, v.sigma2_hom);
      },
      py::arg("sample"), py::arg("J"), py::arg("norm"));

  m.def("robust_se", &robust_se, py::arg("weights"), py::arg("u2_hat"));
  m.def("lindeberg_ratio", &lindeberg_ratio, py::arg("weights"));

  m.def(
      "feasible_pipeline",
      [](const Sample& sample, const std::vector<double>& c_grid,
         const NormSpec& norm, const std::string& target, double alpha,
         double beta, int nn_neighbors) {
        TargetKind k = target == "cate" ? TargetKind::cate : TargetKind::catt;
        PipelineOptions opt;
        opt.nn_neighbors = nn_neighbors;
        PipelineReport rep =
            feasible_pipeline(sample, c_grid, norm, target_weights(k, sample),
                              alpha, beta, opt);
        py::list rows;
        for (const PipelineRow& r : rep.rows) {
          py::dict d;
          d["C"] = r.lipschitz_constant;
          d["criterion"] = to_string(r.criterion);
          d["delta"] = r.delta;
          d["estimate"] = r.estimate;
          d["maxbias"] = r.maxbias;
          d["se_homoskedastic"] = r.se_homoskedastic;
          d["se_robust"] = r.se_robust;
          d["critical_value"] = r.critical_value;
          d["flci_lower"] = r.flci.lower();
          d["flci_upper"] = r.flci.upper();
          d["lindeberg"] = r.lindeberg;
          rows.append(std::move(d));
        }
        return rows;
      },
      py::arg("sample"), py::arg("c_grid"), py::arg("norm"),
      py::arg("target") = "catt", py::arg("alpha") = 0.05,
      py::arg("beta") = 0.8, py::arg("nn_neighbors") = 3);
}
