#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "did/crossfit.hpp"
#include "did/data_model.hpp"

namespace did {

// f(x) = intercept + slope . x (slope may be shorter than x; missing entries
// are zero).
struct LinearFunction {
  double intercept = 0.0;
  Eigen::VectorXd slope;

  double operator()(const Eigen::VectorXd& x) const {
    double v = intercept;
    for (int j = 0; j < slope.size() && j < x.size(); ++j) v += slope[j] * x[j];
    return v;
  }
};

// Synthetic-data law with closed-form nuisances. Covariates are iid standard
// Gaussian. All selection indices (logit links) may load only on the first
// covariate and the treatment-effect heterogeneity only on later covariates;
// this keeps theta exactly equal to effect.intercept because the effect is
// mean-independent of the selection variables.
struct DgpSpec {
  Setting setting = Setting::CS4;
  int n = 1000;
  std::uint64_t seed = 0;
  int p = 3;

  // selection: logit indices, used per setting
  LinearFunction cell_index[2][2];  // CS-1 multinomial utilities, (0,0) base
  LinearFunction pd_index;          // Pr(D=1|x): CS-2, CS-4, PA-1
  LinearFunction pt_index;          // Pr(T=1|x): CS-2
  LinearFunction pd_index_t[2];     // Pr(D=1|T=t,x): CS-3
  double p_d_const = 0.5;           // CS-5, PA-2
  double p_t_const = 0.5;           // CS-3, CS-4, CS-5

  // outcome cell means: m_Y(0,0,x) = base(x); m_Y(0,1,x) = base + trend;
  // m_Y(1,0,x) = base + group; m_Y(1,1,x) = base + group + trend + effect.
  LinearFunction base;
  LinearFunction trend;
  LinearFunction group;
  LinearFunction effect;

  double sigma = 1.0;
  double rho = 0.0;  // corr of the two panel noise draws

  double theta_true() const { return effect.intercept; }
};

// Paper-flavored defaults for each setting: mild confounding through the
// first covariate, heterogeneous effect through the second.
DgpSpec default_spec(Setting setting);

// Checks the structural conventions above and that every propensity stays
// inside [0.05, 0.95] for at least 99.9% of a fixed 1e5 pre-sample.
void validate_spec(const DgpSpec& spec);

using NuisanceFn = std::function<double(const Eigen::VectorXd&)>;

// True nuisance functions and population scalars of a DgpSpec. Functions not
// defined for the spec's structure are left empty.
struct OracleNuisances {
  Setting setting = Setting::CS4;
  double theta_true = 0.0;

  NuisanceFn cell_prop[2][2];
  NuisanceFn p_d_x;
  NuisanceFn p_t_x;
  NuisanceFn p_d_given_t[2];
  NuisanceFn p_t_given_d[2];
  NuisanceFn m_y[2][2];
  NuisanceFn m_dy[2];
  NuisanceFn var_sum[2];  // Var(Y(1) + Y(0) | D=d, X=x), panel specs

  double p_d = 0.0;
  double p_t = 0.0;
  double p_dt = 0.0;
  double p_d1 = 0.0;
  double cell_prob[2][2] = {};  // population Pr(D=d, T=t)

  // Fills NuisanceEstimates with true values (no clipping). Optional
  // (cancelling) functions are included when available unless
  // include_optional is false.
  NuisanceEstimates evaluate(const CrossSectionDataset& data, Setting setting,
                             Variant variant, bool include_optional = true) const;
  NuisanceEstimates evaluate(const PanelDataset& data, Setting setting,
                             Variant variant, bool include_optional = true) const;
};

CrossSectionDataset generate_cross_section(const DgpSpec& spec);
PanelDataset generate_panel(const DgpSpec& spec);
OracleNuisances oracle_nuisances(const DgpSpec& spec);

// Merged repeated cross-section implied by a panel: T ~ Bernoulli(1/2)
// independent of everything, Y = Y(T).
CrossSectionDataset cross_section_view(const PanelDataset& panel,
                                       std::uint64_t seed);
// Oracle for that view (cell propensities p_{D=d}(x)/2, p_T = 1/2).
OracleNuisances cross_section_view_oracle(const DgpSpec& panel_spec);

enum class MisspecMode { Constant, WrongLink, OmitCovariate };

// Returns a copy of the oracle with one function replaced by a fixed wrong
// function. Targets: cell_d_t, p_d_x, p_t_x, p_d_given_t_t, p_t_given_d_d,
// m_y_d_t, m_dy_d (indices spelled out, e.g. "m_y_0_1").
OracleNuisances misspecify(const OracleNuisances& oracle,
                           const std::string& target, MisspecMode mode);

}  // namespace did
