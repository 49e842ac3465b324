#pragma once

#include <Eigen/Dense>

#include "did/crossfit.hpp"
#include "did/data_model.hpp"

namespace did {

// Per-observation score decomposition: psi(W, eta; theta) =
// psi_num - psi_b * theta identically in theta.
struct ScoreEvaluation {
  Eigen::VectorXd psi_num;
  Eigen::VectorXd psi_b;

  int n() const { return static_cast<int>(psi_num.size()); }
};

ScoreEvaluation evaluate_scores(const CrossSectionDataset& data,
                                const NuisanceEstimates& est, Setting setting,
                                Variant variant);
ScoreEvaluation evaluate_scores(const PanelDataset& data,
                                const NuisanceEstimates& est, Setting setting,
                                Variant variant);

struct EstimateResult {
  double theta_hat = 0.0;
  double std_error = 0.0;
  int n = 0;
  Setting setting = Setting::CS1;
  Variant variant = Variant::Efficient;

  // diagnostics
  double mean_psi_b = 0.0;
  double min_prob = 1.0;
  double max_prob = 0.0;
  int folds = 0;
  std::uint64_t seed = 0;
};

// theta_hat = mean(psi_num) / mean(psi_b);
// std_error = sqrt(mean((psi_num - psi_b * theta_hat)^2) / N).
EstimateResult estimate(const CrossSectionDataset& data,
                        const NuisanceEstimates& est, Setting setting,
                        Variant variant);
EstimateResult estimate(const PanelDataset& data, const NuisanceEstimates& est,
                        Setting setting, Variant variant);

// Inverse-probability-weighting benchmark (CS-4 nuisances).
EstimateResult ipw_estimate(const CrossSectionDataset& data,
                            const NuisanceEstimates& est);

}  // namespace did
