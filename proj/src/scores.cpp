#include <cmath>
#include <string>

#include "did/scores.hpp"

namespace did {

namespace {

void require_vector(const Eigen::VectorXd& v, int n, const std::string& name) {
  if (v.size() != n)
    fail(ErrorCode::MissingNuisance, name + " missing or wrong length");
}

// Optional (cancelling) regressions default to zero when not fitted.
double at_or_zero(const Eigen::VectorXd& v, int i) {
  return v.size() > 0 ? v[i] : 0.0;
}

void check_cs_requirement(const NuisanceEstimates& est, int n,
                          const NuisanceRequirement& req) {
  if (req.cell_prop)
    for (int d = 0; d < 2; ++d)
      for (int t = 0; t < 2; ++t)
        require_vector(est.cell_prop[d][t], n,
                       "p_{D=" + std::to_string(d) + ",T=" + std::to_string(t) + "}(x)");
  if (req.p_d_x) require_vector(est.p_d_x, n, "p_D(x)");
  if (req.p_t_x) require_vector(est.p_t_x, n, "p_T(x)");
  for (int t = 0; t < 2; ++t)
    if (req.p_d_given_t[t])
      require_vector(est.p_d_given_t[t], n, "p_D(" + std::to_string(t) + ",x)");
  for (int d = 0; d < 2; ++d)
    if (req.p_t_given_d[d])
      require_vector(est.p_t_given_d[d], n, "p_T(" + std::to_string(d) + ",x)");
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t)
      if (req.m_y[d][t])
        require_vector(est.m_y[d][t], n,
                       "m_Y(" + std::to_string(d) + "," + std::to_string(t) + ",x)");
}

// q_{D=d,T=t}(x_i) for the factorization the variant uses; also yields
// q_1(x_i) = q_{D=1,T=1}(x_i) and the scalar q_1.
struct CellProbabilities {
  double q[2][2];
};

CellProbabilities cell_probabilities(const NuisanceEstimates& est, Setting setting,
                                     Variant variant, int i) {
  CellProbabilities c;
  auto fill_product = [&](double p1_d0, double p1_d1, double p2_t0, double p2_t1) {
    // q_{dt} = Pr(D=d | .)(x) * Pr(T=t | .)(x) with the two margins supplied
    c.q[0][0] = p1_d0 * p2_t0;
    c.q[0][1] = p1_d0 * p2_t1;
    c.q[1][0] = p1_d1 * p2_t0;
    c.q[1][1] = p1_d1 * p2_t1;
  };
  switch (setting) {
    case Setting::CS1:
      if (variant == Variant::Star2) {
        // q_{dt} = p_{D=d}(t,x) p_{T=t}(x)
        const double pt = est.p_t_x[i];
        c.q[0][0] = (1.0 - est.p_d_given_t[0][i]) * (1.0 - pt);
        c.q[1][0] = est.p_d_given_t[0][i] * (1.0 - pt);
        c.q[0][1] = (1.0 - est.p_d_given_t[1][i]) * pt;
        c.q[1][1] = est.p_d_given_t[1][i] * pt;
      } else if (variant == Variant::Star3) {
        // q_{dt} = p_{T=t}(d,x) p_{D=d}(x)
        const double pd = est.p_d_x[i];
        c.q[0][0] = (1.0 - est.p_t_given_d[0][i]) * (1.0 - pd);
        c.q[0][1] = est.p_t_given_d[0][i] * (1.0 - pd);
        c.q[1][0] = (1.0 - est.p_t_given_d[1][i]) * pd;
        c.q[1][1] = est.p_t_given_d[1][i] * pd;
      } else {
        for (int d = 0; d < 2; ++d)
          for (int t = 0; t < 2; ++t) c.q[d][t] = est.cell_prop[d][t][i];
      }
      break;
    case Setting::CS2:
      fill_product(1.0 - est.p_d_x[i], est.p_d_x[i], 1.0 - est.p_t_x[i],
                   est.p_t_x[i]);
      break;
    case Setting::CS3:
      // q_{dt} = p_{D=d}(t,x) * Pr(T=t)
      c.q[0][0] = (1.0 - est.p_d_given_t[0][i]) * (1.0 - est.p_t);
      c.q[1][0] = est.p_d_given_t[0][i] * (1.0 - est.p_t);
      c.q[0][1] = (1.0 - est.p_d_given_t[1][i]) * est.p_t;
      c.q[1][1] = est.p_d_given_t[1][i] * est.p_t;
      break;
    case Setting::CS4:
      fill_product(1.0 - est.p_d_x[i], est.p_d_x[i], 1.0 - est.p_t, est.p_t);
      break;
    case Setting::CS5:
      fill_product(1.0 - est.p_d, est.p_d, 1.0 - est.p_t, est.p_t);
      break;
    default:
      fail(ErrorCode::IncompatiblePair, "panel setting in cross-section scores");
  }
  return c;
}

double scalar_q1(const NuisanceEstimates& est, Setting setting) {
  switch (setting) {
    case Setting::CS1:
    case Setting::CS2:
      return est.p_dt;
    case Setting::CS3:
      return est.p_d1 * est.p_t;
    case Setting::CS4:
    case Setting::CS5:
      return est.p_d * est.p_t;
    default:
      fail(ErrorCode::IncompatiblePair, "panel setting in cross-section scores");
  }
}

ScoreEvaluation cross_section_scores(const CrossSectionDataset& data,
                                     const NuisanceEstimates& est, Setting setting,
                                     Variant variant) {
  const int n = data.n();
  const NuisanceRequirement req = required_nuisances(setting, variant);
  check_cs_requirement(est, n, req);

  ScoreEvaluation ev;
  ev.psi_num.resize(n);
  ev.psi_b.resize(n);

  if (variant == Variant::DiffMeans) {
    for (int i = 0; i < n; ++i) {
      const int d = data.d[i], t = data.t[i];
      const double sign = ((d + t) % 2 == 0) ? 1.0 : -1.0;
      ev.psi_num[i] = sign * data.y[i] / est.cell_freq[d][t];
      ev.psi_b[i] = 1.0;
    }
    return ev;
  }
  if (variant == Variant::IpwBenchmark) {
    for (int i = 0; i < n; ++i) {
      const double pd = est.p_d_x[i];
      ev.psi_num[i] = data.y[i] * (data.d[i] - pd) * (data.t[i] - est.p_t) /
                      (est.p_d * est.p_t * (1.0 - est.p_t) * (1.0 - pd));
      ev.psi_b[i] = 1.0;
    }
    return ev;
  }

  const double q1 = scalar_q1(est, setting);
  for (int i = 0; i < n; ++i) {
    const CellProbabilities c = cell_probabilities(est, setting, variant, i);
    const int di = data.d[i], ti = data.t[i];

    const double m[2][2] = {{at_or_zero(est.m_y[0][0], i), at_or_zero(est.m_y[0][1], i)},
                            {at_or_zero(est.m_y[1][0], i), at_or_zero(est.m_y[1][1], i)}};
    // DiD combination of cell means: m11 - m10 - m01 + m00
    const double m_did = m[1][1] - m[1][0] - m[0][1] + m[0][0];

    // psi_a for the observed cell; G_{dt} selects a single term
    const double sign = ((di + ti) % 2 == 0) ? 1.0 : -1.0;
    const double psi_a = sign * (data.y[i] - m[di][ti]) / c.q[di][ti];
    const double prefactor = c.q[1][1] / q1;

    double psi_b;
    switch (setting) {
      case Setting::CS1:
        psi_b = (di * ti) / est.p_dt;
        break;
      case Setting::CS2:
        if (variant == Variant::PrimeCS2)
          psi_b = (di * ti) / est.p_dt;
        else
          psi_b = (di * est.p_t_x[i] + est.p_d_x[i] * ti -
                   est.p_d_x[i] * est.p_t_x[i]) /
                  est.p_dt;
        break;
      case Setting::CS3:
        psi_b = (ti * (di - est.p_d_given_t[1][i]) +
                 est.p_d_given_t[1][i] * est.p_t) /
                (est.p_d1 * est.p_t);
        break;
      case Setting::CS4:
        psi_b = di / est.p_d;
        break;
      case Setting::CS5:
        psi_b = 1.0;
        break;
      default:
        fail(ErrorCode::IncompatiblePair, "panel setting in cross-section scores");
    }

    double psi_num = prefactor * psi_a + psi_b * m_did;
    if (variant == Variant::PrimeCS4) {
      // correction terms cancel the treated-cell regressions exactly
      const double dp = di / est.p_d;
      psi_num += dp * (ti / est.p_t - 1.0) * m[1][1] -
                 dp * ((1.0 - ti) / (1.0 - est.p_t) - 1.0) * m[1][0];
    }
    ev.psi_num[i] = psi_num;
    ev.psi_b[i] = psi_b;
  }
  return ev;
}

ScoreEvaluation panel_scores(const PanelDataset& data, const NuisanceEstimates& est,
                             Setting setting, Variant variant) {
  const int n = data.n();
  const NuisanceRequirement req = required_nuisances(setting, variant);
  if (req.p_d_x) require_vector(est.p_d_x, n, "p_D(x)");
  for (int d = 0; d < 2; ++d)
    if (req.m_dy[d])
      require_vector(est.m_dy[d], n, "m_dY(" + std::to_string(d) + ",x)");

  const Eigen::VectorXd dy = data.delta_y();
  ScoreEvaluation ev;
  ev.psi_num.resize(n);
  ev.psi_b.resize(n);

  for (int i = 0; i < n; ++i) {
    const int di = data.d[i];
    if (variant == Variant::DiffMeans) {
      ev.psi_num[i] = di * dy[i] / est.p_d - (1 - di) * dy[i] / (1.0 - est.p_d);
      ev.psi_b[i] = 1.0;
      continue;
    }
    const double m0 = at_or_zero(est.m_dy[0], i);
    const double m1 = at_or_zero(est.m_dy[1], i);
    if (setting == Setting::PA1) {
      const double pd = est.p_d_x[i];
      const double prefactor = pd / est.p_d;
      const double psi_a = di / pd * (dy[i] - m1) -
                           (1 - di) / (1.0 - pd) * (dy[i] - m0);
      ev.psi_num[i] = prefactor * psi_a + (di / est.p_d) * (m1 - m0);
      ev.psi_b[i] = di / est.p_d;
    } else {  // PA2
      const double psi_a = di / est.p_d * (dy[i] - m1) -
                           (1 - di) / (1.0 - est.p_d) * (dy[i] - m0);
      ev.psi_num[i] = psi_a + (m1 - m0);
      ev.psi_b[i] = 1.0;
    }
  }
  return ev;
}

EstimateResult from_evaluation(const ScoreEvaluation& ev, const NuisanceEstimates& est,
                               Setting setting, Variant variant) {
  const int n = ev.n();
  const double mean_b = ev.psi_b.mean();
  if (std::abs(mean_b) < 1e-10)
    fail(ErrorCode::DegenerateDenominator, "mean psi_b is numerically zero");
  EstimateResult res;
  res.theta_hat = ev.psi_num.mean() / mean_b;
  res.std_error =
      std::sqrt((ev.psi_num - ev.psi_b * res.theta_hat).squaredNorm() / n / n);
  res.n = n;
  res.setting = setting;
  res.variant = variant;
  res.mean_psi_b = mean_b;
  res.min_prob = est.min_prob;
  res.max_prob = est.max_prob;
  res.folds = est.folds;
  res.seed = est.seed;
  return res;
}

}  // namespace

ScoreEvaluation evaluate_scores(const CrossSectionDataset& data,
                                const NuisanceEstimates& est, Setting setting,
                                Variant variant) {
  if (is_panel(setting))
    fail(ErrorCode::IncompatiblePair, "panel setting on a cross-section dataset");
  return cross_section_scores(data, est, setting, variant);
}

ScoreEvaluation evaluate_scores(const PanelDataset& data,
                                const NuisanceEstimates& est, Setting setting,
                                Variant variant) {
  if (!is_panel(setting))
    fail(ErrorCode::IncompatiblePair, "cross-section setting on a panel dataset");
  return panel_scores(data, est, setting, variant);
}

EstimateResult estimate(const CrossSectionDataset& data,
                        const NuisanceEstimates& est, Setting setting,
                        Variant variant) {
  return from_evaluation(evaluate_scores(data, est, setting, variant), est,
                         setting, variant);
}

EstimateResult estimate(const PanelDataset& data, const NuisanceEstimates& est,
                        Setting setting, Variant variant) {
  return from_evaluation(evaluate_scores(data, est, setting, variant), est,
                         setting, variant);
}

EstimateResult ipw_estimate(const CrossSectionDataset& data,
                            const NuisanceEstimates& est) {
  return estimate(data, est, Setting::CS4, Variant::IpwBenchmark);
}

}  // namespace did
