#include <cmath>
#include <set>
#include <string>

#include "did/harness.hpp"

namespace did {

namespace {

EstimateResult run_one(const EstimatorSpec& est, const CrossSectionDataset* cs,
                       const PanelDataset* pa, const OracleNuisances& truth,
                       std::uint64_t seed) {
  NuisanceEstimates nuis;
  if (est.oracle) {
    const OracleNuisances& oracle =
        est.oracle_override ? *est.oracle_override : truth;
    nuis = cs ? oracle.evaluate(*cs, est.setting, est.variant)
              : oracle.evaluate(*pa, est.setting, est.variant);
  } else {
    CrossfitOptions options;
    options.learner = est.learner;
    options.k = est.folds;
    options.eps = est.eps;
    options.seed = seed;
    nuis = cs ? crossfit(*cs, est.setting, est.variant, options)
              : crossfit(*pa, est.setting, est.variant, options);
  }
  return cs ? estimate(*cs, nuis, est.setting, est.variant)
            : estimate(*pa, nuis, est.setting, est.variant);
}

}  // namespace

double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) fail(ErrorCode::Config, "quantile level outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) return -normal_quantile(1.0 - p);
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  if (spec.replications < 1) fail(ErrorCode::Config, "replications must be >= 1");
  if (spec.estimators.empty()) fail(ErrorCode::Config, "no estimators given");
  if (spec.sample_sizes.empty()) fail(ErrorCode::Config, "no sample sizes given");
  for (const EstimatorSpec& e : spec.estimators) {
    if (is_panel(e.setting) != is_panel(spec.dgp.setting))
      fail(ErrorCode::IncompatiblePair,
           "estimator " + to_string(e.setting) + " does not match the DGP type");
    if (!compatible(e.setting, e.variant))
      fail(ErrorCode::IncompatiblePair,
           to_string(e.setting) + " does not support " + to_string(e.variant));
  }
  const OracleNuisances truth = oracle_nuisances(spec.dgp);
  const double z = normal_quantile(0.5 + spec.confidence / 2.0);
  const bool panel = is_panel(spec.dgp.setting);

  ExperimentReport report;
  report.theta_true = truth.theta_true;
  report.replications = spec.replications;

  for (size_t si = 0; si < spec.sample_sizes.size(); ++si) {
    std::vector<ExperimentCell> cells(spec.estimators.size());
    for (size_t e = 0; e < spec.estimators.size(); ++e) {
      cells[e].setting = spec.estimators[e].setting;
      cells[e].variant = spec.estimators[e].variant;
      cells[e].oracle = spec.estimators[e].oracle;
      cells[e].n = spec.sample_sizes[si];
    }
    std::vector<double> se_sum(spec.estimators.size(), 0.0);
    std::vector<long> covered(spec.estimators.size(), 0);

    for (int r = 0; r < spec.replications; ++r) {
      DgpSpec draw = spec.dgp;
      draw.n = spec.sample_sizes[si];
      draw.seed = derive_seed(spec.master_seed, si, r);
      CrossSectionDataset cs;
      PanelDataset pa;
      if (panel)
        pa = generate_panel(draw);
      else
        cs = generate_cross_section(draw);

      for (size_t e = 0; e < spec.estimators.size(); ++e) {
        EstimateResult res;
        try {
          res = run_one(spec.estimators[e], panel ? nullptr : &cs,
                        panel ? &pa : nullptr, truth,
                        derive_seed(draw.seed, 0x657374ULL, e));
        } catch (const DidError& err) {
          fail(err.code(), "replication " + std::to_string(r) + ": " + err.what());
        }
        cells[e].theta_hats.push_back(res.theta_hat);
        se_sum[e] += res.std_error;
        if (std::abs(res.theta_hat - truth.theta_true) <= z * res.std_error)
          ++covered[e];
      }
    }

    for (size_t e = 0; e < spec.estimators.size(); ++e) {
      ExperimentCell& cell = cells[e];
      const int R = spec.replications;
      double mean = 0.0;
      for (double t : cell.theta_hats) mean += t;
      mean /= R;
      double var = 0.0;
      for (double t : cell.theta_hats) var += (t - mean) * (t - mean);
      cell.mean_bias = mean - truth.theta_true;
      cell.sd = R > 1 ? std::sqrt(var / (R - 1)) : 0.0;
      cell.mean_se = se_sum[e] / R;
      cell.coverage = static_cast<double>(covered[e]) / R;
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

EstimateResult run_placebo(const PrePeriodData& data, int split_period,
                           Setting setting, Variant variant,
                           const CrossfitOptions& options) {
  std::set<int> labels(data.period.begin(), data.period.end());
  if (labels.size() < 2)
    fail(ErrorCode::SinglePeriod,
         "placebo test needs at least two distinct pre-period labels");
  Eigen::VectorXi t(data.n());
  for (int i = 0; i < data.n(); ++i) t[i] = data.period[i] > split_period ? 1 : 0;
  const CrossSectionDataset pseudo =
      validate_cross_section(data.y, data.d, std::move(t), data.x);
  const NuisanceEstimates nuis = crossfit(pseudo, setting, variant, options);
  return estimate(pseudo, nuis, setting, variant);
}

}  // namespace did
