#pragma once

#include <memory>
#include <vector>

#include "did/dgp.hpp"
#include "did/scores.hpp"

namespace did {

// One estimator to run per replication. With `oracle` set, nuisances come
// from the true functions (optionally overridden, e.g. misspecified) instead
// of cross-fitting.
struct EstimatorSpec {
  Setting setting = Setting::CS4;
  Variant variant = Variant::Efficient;
  bool oracle = false;
  std::shared_ptr<const OracleNuisances> oracle_override;  // optional
  LearnerSpec learner;
  int folds = 2;
  double eps = 0.01;
};

struct ExperimentSpec {
  DgpSpec dgp;  // dgp.n is ignored; sample_sizes drives the grid
  std::vector<EstimatorSpec> estimators;
  std::vector<int> sample_sizes;
  int replications = 100;
  double confidence = 0.95;
  std::uint64_t master_seed = 0;
};

// Aggregates per estimator x sample size. Replication draws are shared
// across estimators, so variance comparisons are paired.
struct ExperimentCell {
  Setting setting = Setting::CS4;
  Variant variant = Variant::Efficient;
  bool oracle = false;
  int n = 0;
  double mean_bias = 0.0;
  double sd = 0.0;       // empirical SD of theta_hat
  double mean_se = 0.0;  // mean estimated standard error
  double coverage = 0.0;
  std::vector<double> theta_hats;  // per replication, for paired tests
};

struct ExperimentReport {
  double theta_true = 0.0;
  int replications = 0;
  std::vector<ExperimentCell> cells;  // ordered by (size index, estimator)
};

ExperimentReport run_experiment(const ExperimentSpec& spec);

// Standard-normal quantile (Acklam's rational approximation, |error| < 1e-9).
double normal_quantile(double p);

// Placebo workflow: relabel pre-period data at `split_period` (periods up to
// and including it become T=0, later ones T=1) and run the estimator; a
// significant theta flags a common-trend violation.
EstimateResult run_placebo(const PrePeriodData& data, int split_period,
                           Setting setting, Variant variant,
                           const CrossfitOptions& options);

}  // namespace did
