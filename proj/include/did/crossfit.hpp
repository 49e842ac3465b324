#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "did/data_model.hpp"
#include "did/nuisance.hpp"

namespace did {

// Which first-stage functions a (setting, variant) pair needs. `optional`
// entries cancel algebraically in the score and are fit only on request.
struct NuisanceRequirement {
  bool cell_prop = false;        // p_{D=d,T=t}(x), all four cells jointly
  bool p_d_x = false;            // p_D(x)
  bool p_t_x = false;            // p_T(x)
  bool p_d_given_t[2] = {};      // p_D(t,x) for t in {0,1}
  bool p_t_given_d[2] = {};      // p_T(d,x) for d in {0,1}
  bool m_y[2][2] = {};           // m_Y(d,t,x)
  bool m_y_optional[2][2] = {};  // redundant cells (cancel in the score)
  bool m_dy[2] = {};             // m_dY(d,x), panel only
  bool m_dy_optional[2] = {};
  bool s_p_d = false;            // Pr(D=1)
  bool s_p_t = false;            // Pr(T=1)
  bool s_p_dt = false;           // Pr(D=1, T=1)
  bool s_p_d1 = false;           // Pr(D=1 | T=1)
};

NuisanceRequirement required_nuisances(Setting setting, Variant variant);

// Per-observation cross-fitted nuisance predictions plus full-sample scalar
// frequencies. Vectors are empty unless the corresponding function was fit
// (or supplied by an oracle). All probabilities are clipped to
// [eps, 1 - eps].
struct NuisanceEstimates {
  Eigen::VectorXd cell_prop[2][2];
  Eigen::VectorXd p_d_x;
  Eigen::VectorXd p_t_x;
  Eigen::VectorXd p_d_given_t[2];
  Eigen::VectorXd p_t_given_d[2];
  Eigen::VectorXd m_y[2][2];
  Eigen::VectorXd m_dy[2];

  double p_d = 0.0;
  double p_t = 0.0;
  double p_dt = 0.0;
  double p_d1 = 0.0;             // Pr(D=1 | T=1)
  double cell_freq[2][2] = {};   // sample share of each (d,t) cell

  // provenance + diagnostics
  int n = 0;
  int folds = 0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  double min_prob = 1.0;         // over all clipped probability predictions
  double max_prob = 0.0;
  long clipped_count = 0;
};

struct CrossfitOptions {
  LearnerSpec learner;
  int k = 2;
  std::uint64_t seed = 0;
  double eps = 0.01;
  bool fit_redundant = false;  // also fit the optional (cancelling) functions
};

// Scalar cell frequencies from the full sample (no cross-fitting; they are
// root-N estimable).
void fill_scalars(const CrossSectionDataset& data, NuisanceEstimates& est);
void fill_scalars(const PanelDataset& data, NuisanceEstimates& est);

// Section 4.1 algorithm: fit every required nuisance on each fold's
// complement and predict on the fold. Deterministic given options.seed.
NuisanceEstimates crossfit(const CrossSectionDataset& data, Setting setting,
                           Variant variant, const CrossfitOptions& options);
NuisanceEstimates crossfit(const PanelDataset& data, Setting setting,
                           Variant variant, const CrossfitOptions& options);

}  // namespace did
