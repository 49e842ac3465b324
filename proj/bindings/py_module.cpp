// Python bindings: the main estimation, simulation, bound, and placebo
// entry points, with numpy arrays mapped to Eigen types.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "did/bounds.hpp"
#include "did/harness.hpp"

namespace py = pybind11;
using namespace did;

namespace {

CrossfitOptions make_options(const std::string& learner, int folds,
                             std::uint64_t seed, double eps) {
  CrossfitOptions options;
  options.learner = learner_spec_from_name(learner);
  options.k = folds;
  options.seed = seed;
  options.eps = eps;
  return options;
}

py::dict result_dict(const EstimateResult& res) {
  py::dict out;
  out["theta"] = res.theta_hat;
  out["se"] = res.std_error;
  out["n"] = res.n;
  out["setting"] = to_string(res.setting);
  out["variant"] = to_string(res.variant);
  out["mean_psi_b"] = res.mean_psi_b;
  out["min_prob"] = res.min_prob;
  out["max_prob"] = res.max_prob;
  out["folds"] = res.folds;
  out["seed"] = res.seed;
  return out;
}

py::dict estimate_cross_section(const Eigen::VectorXd& y,
                                const Eigen::VectorXi& d,
                                const Eigen::VectorXi& t,
                                const Eigen::MatrixXd& x,
                                const std::string& setting,
                                const std::string& variant,
                                const std::string& learner, int folds,
                                std::uint64_t seed, double eps) {
  const Setting s = parse_setting(setting);
  const Variant v = parse_variant(variant);
  if (is_panel(s))
    fail(ErrorCode::IncompatiblePair, setting + " needs estimate_panel");
  const CrossSectionDataset data = validate_cross_section(y, d, t, x);
  const NuisanceEstimates nuis =
      crossfit(data, s, v, make_options(learner, folds, seed, eps));
  return result_dict(estimate(data, nuis, s, v));
}

py::dict estimate_panel(const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                        const Eigen::VectorXi& d, const Eigen::MatrixXd& x,
                        const std::string& setting, const std::string& variant,
                        const std::string& learner, int folds,
                        std::uint64_t seed, double eps) {
  const Setting s = parse_setting(setting);
  const Variant v = parse_variant(variant);
  if (!is_panel(s))
    fail(ErrorCode::IncompatiblePair, setting + " needs estimate_cross_section");
  const PanelDataset data = validate_panel(y0, y1, d, x);
  const NuisanceEstimates nuis =
      crossfit(data, s, v, make_options(learner, folds, seed, eps));
  return result_dict(estimate(data, nuis, s, v));
}

py::dict generate(const std::string& setting, int n, std::uint64_t seed) {
  DgpSpec spec = default_spec(parse_setting(setting));
  spec.n = n;
  spec.seed = seed;
  validate_spec(spec);
  py::dict out;
  out["setting"] = setting;
  out["theta_true"] = spec.theta_true();
  if (is_panel(spec.setting)) {
    const PanelDataset data = generate_panel(spec);
    out["y0"] = data.y0;
    out["y1"] = data.y1;
    out["d"] = data.d;
    out["x"] = data.x;
  } else {
    const CrossSectionDataset data = generate_cross_section(spec);
    out["y"] = data.y;
    out["d"] = data.d;
    out["t"] = data.t;
    out["x"] = data.x;
  }
  return out;
}

py::dict efficiency_bound(const std::string& dgp_setting,
                          const std::string& setting,
                          const std::string& variant, long n_mc,
                          std::uint64_t seed) {
  const BoundReport report =
      efficiency_bound_mc(default_spec(parse_setting(dgp_setting)),
                          parse_setting(setting), parse_variant(variant), n_mc,
                          seed);
  py::dict out;
  out["setting"] = to_string(report.setting);
  out["variant"] = to_string(report.variant);
  out["bound"] = report.bound;
  out["mc_se"] = report.mc_std_error;
  out["n_mc"] = report.n_mc;
  out["seed"] = report.seed;
  return out;
}

py::dict variance_gap(const std::string& pair, const std::string& dgp_setting,
                      long n_mc, std::uint64_t seed) {
  const DeltaReport report =
      delta_closed_form(parse_delta_pair(pair),
                        default_spec(parse_setting(dgp_setting)), n_mc, seed);
  py::dict out;
  out["pair"] = to_string(report.pair);
  out["closed_form"] = report.closed_form;
  out["closed_form_se"] = report.closed_form_se;
  out["from_bounds"] = report.from_bounds;
  out["from_bounds_se"] = report.from_bounds_se;
  out["n_mc"] = report.n_mc;
  out["seed"] = report.seed;
  return out;
}

py::dict placebo(const Eigen::VectorXd& y, const Eigen::VectorXi& d,
                 const Eigen::VectorXi& period, const Eigen::MatrixXd& x,
                 int split, const std::string& setting,
                 const std::string& variant, const std::string& learner,
                 int folds, std::uint64_t seed, double eps) {
  PrePeriodData data;
  data.y = y;
  data.d = d;
  data.period = period;
  data.x = x;
  return result_dict(run_placebo(data, split, parse_setting(setting),
                                 parse_variant(variant),
                                 make_options(learner, folds, seed, eps)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Semiparametric difference-in-differences estimation of the ATET under "
      "seven assumption settings, with cross-fitted first stages and "
      "influence-function inference.";

  py::register_exception<DidError>(m, "DidError");

  m.def("estimate_cross_section", &estimate_cross_section, py::arg("y"),
        py::arg("d"), py::arg("t"), py::arg("x"), py::arg("setting"),
        py::arg("variant") = "efficient", py::arg("learner") = "ensemble",
        py::arg("folds") = 2, py::arg("seed") = 0, py::arg("eps") = 0.01,
        "Cross-fitted ATET estimate from repeated cross-section data "
        "(settings cs1..cs5).");
  m.def("estimate_panel", &estimate_panel, py::arg("y0"), py::arg("y1"),
        py::arg("d"), py::arg("x"), py::arg("setting"),
        py::arg("variant") = "efficient", py::arg("learner") = "ensemble",
        py::arg("folds") = 2, py::arg("seed") = 0, py::arg("eps") = 0.01,
        "Cross-fitted ATET estimate from two-period panel data (pa1, pa2).");
  m.def("generate", &generate, py::arg("setting"), py::arg("n"),
        py::arg("seed") = 0,
        "Synthetic dataset from the setting's default law; includes "
        "theta_true.");
  m.def("efficiency_bound", &efficiency_bound, py::arg("dgp_setting"),
        py::arg("setting"), py::arg("variant") = "efficient",
        py::arg("n_mc") = 1000000, py::arg("seed") = 0,
        "Monte Carlo semiparametric efficiency bound of `setting` evaluated "
        "on `dgp_setting`'s default law.");
  m.def("variance_gap", &variance_gap, py::arg("pair"), py::arg("dgp_setting"),
        py::arg("n_mc") = 1000000, py::arg("seed") = 0,
        "Closed-form variance gap between two settings, cross-checked "
        "against differenced bound estimates.");
  m.def("placebo", &placebo, py::arg("y"), py::arg("d"), py::arg("period"),
        py::arg("x"), py::arg("split"), py::arg("setting") = "cs4",
        py::arg("variant") = "efficient", py::arg("learner") = "ensemble",
        py::arg("folds") = 2, py::arg("seed") = 0, py::arg("eps") = 0.01,
        "Common-trend placebo estimate on pre-period data; periods after "
        "`split` act as the pseudo post period.");
}
