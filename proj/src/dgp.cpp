#include <array>
#include <cmath>
#include <random>

#include "did/dgp.hpp"

namespace did {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// E[f(Z)] for Z ~ N(0,1), Simpson's rule; exact to near machine precision
// for the smooth bounded integrands used here.
double gauss_mean(const std::function<double(double)>& f) {
  const double lo = -8.5, hi = 8.5;
  const int intervals = 4096;  // even
  const double h = (hi - lo) / intervals;
  auto g = [&](double z) {
    return f(z) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  };
  double sum = g(lo) + g(hi);
  for (int i = 1; i < intervals; ++i) sum += g(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// All selection indices act through the first covariate only.
double index_at(const LinearFunction& f, double x1) {
  return f.intercept + (f.slope.size() > 0 ? f.slope[0] * x1 : 0.0);
}

void cs1_cells(const DgpSpec& spec, double x1, double out[2][2]) {
  double u[2][2], total = 0.0;
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t) {
      u[d][t] = std::exp(index_at(spec.cell_index[d][t], x1));
      total += u[d][t];
    }
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t) out[d][t] = u[d][t] / total;
}

void check_selection_slope(const LinearFunction& f, const char* name) {
  for (int j = 1; j < f.slope.size(); ++j)
    if (f.slope[j] != 0.0)
      fail(ErrorCode::InfeasibleSpec,
           std::string(name) + " may load only on the first covariate");
}

LinearFunction sum3(const LinearFunction& a, const LinearFunction& b) {
  LinearFunction out;
  out.intercept = a.intercept + b.intercept;
  const int len = static_cast<int>(std::max(a.slope.size(), b.slope.size()));
  out.slope = Eigen::VectorXd::Zero(len);
  out.slope.head(a.slope.size()) += a.slope;
  out.slope.head(b.slope.size()) += b.slope;
  return out;
}

NuisanceFn constant_fn(double c) {
  return [c](const Eigen::VectorXd&) { return c; };
}

NuisanceFn linear_fn(LinearFunction f) {
  return [f](const Eigen::VectorXd& x) { return f(x); };
}

// m_Y(d, t, x) as implied by the block construction; the common-trend
// restriction holds by construction.
LinearFunction cell_mean(const DgpSpec& spec, int d, int t) {
  LinearFunction m = spec.base;
  if (d == 1) m = sum3(m, spec.group);
  if (t == 1) m = sum3(m, spec.trend);
  if (d == 1 && t == 1) m = sum3(m, spec.effect);
  return m;
}

void fill_outcome_oracle(const DgpSpec& spec, OracleNuisances& o) {
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t) o.m_y[d][t] = linear_fn(cell_mean(spec, d, t));
}

void apply_fn(const NuisanceFn& f, const Eigen::MatrixXd& x, Eigen::VectorXd& out,
              const std::string& name) {
  if (!f) fail(ErrorCode::MissingNuisance, "oracle lacks " + name);
  out.resize(x.rows());
  for (int i = 0; i < x.rows(); ++i) out[i] = f(x.row(i));
}

void track_probs(const Eigen::VectorXd& v, NuisanceEstimates& est) {
  if (v.size() == 0) return;
  est.min_prob = std::min(est.min_prob, v.minCoeff());
  est.max_prob = std::max(est.max_prob, v.maxCoeff());
}

}  // namespace

DgpSpec default_spec(Setting setting) {
  DgpSpec spec;
  spec.setting = setting;
  spec.p = 3;

  auto lf = [](double intercept, double s1, double s2) {
    LinearFunction f;
    f.intercept = intercept;
    f.slope = Eigen::VectorXd::Zero(3);
    f.slope[0] = s1;
    f.slope[1] = s2;
    return f;
  };
  spec.base = lf(1.0, 1.0, 0.5);
  spec.trend = lf(0.5, 0.5, 0.0);
  spec.group = lf(0.5, 0.5, 0.0);
  spec.effect = lf(1.0, 0.0, 0.5);
  spec.sigma = 1.0;

  switch (setting) {
    case Setting::CS1:
      spec.cell_index[0][0] = lf(0.0, 0.0, 0.0);
      spec.cell_index[0][1] = lf(0.0, 0.15, 0.0);
      spec.cell_index[1][0] = lf(0.0, -0.3, 0.0);
      spec.cell_index[1][1] = lf(0.0, 0.3, 0.0);
      break;
    case Setting::CS2:
      spec.pd_index = lf(0.0, 0.5, 0.0);
      spec.pt_index = lf(0.2, 0.3, 0.0);
      break;
    case Setting::CS3:
      spec.pd_index_t[0] = lf(-0.2, 0.4, 0.0);
      spec.pd_index_t[1] = lf(0.2, 0.4, 0.0);
      spec.p_t_const = 0.5;
      break;
    case Setting::CS4:
      spec.pd_index = lf(0.0, 0.5, 0.0);
      spec.p_t_const = 0.5;
      break;
    case Setting::CS5:
      spec.p_d_const = 0.5;
      spec.p_t_const = 0.5;
      break;
    case Setting::PA1:
      spec.pd_index = lf(0.0, 0.5, 0.0);
      spec.rho = 0.3;
      break;
    case Setting::PA2:
      spec.p_d_const = 0.5;
      spec.rho = 0.3;
      break;
  }
  return spec;
}

void validate_spec(const DgpSpec& spec) {
  if (spec.p < 1) fail(ErrorCode::InfeasibleSpec, "covariate dimension must be >= 1");
  if (spec.n < 1) fail(ErrorCode::InfeasibleSpec, "sample size must be >= 1");
  if (spec.sigma < 0.0) fail(ErrorCode::InfeasibleSpec, "sigma must be nonnegative");
  if (std::abs(spec.rho) > 1.0) fail(ErrorCode::InfeasibleSpec, "rho must lie in [-1, 1]");
  if (spec.effect.slope.size() > 0 && spec.effect.slope[0] != 0.0)
    fail(ErrorCode::InfeasibleSpec,
         "effect heterogeneity may not load on the first covariate");
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t)
      check_selection_slope(spec.cell_index[d][t], "cell index");
  check_selection_slope(spec.pd_index, "pd index");
  check_selection_slope(spec.pt_index, "pt index");
  check_selection_slope(spec.pd_index_t[0], "pd|t index");
  check_selection_slope(spec.pd_index_t[1], "pd|t index");

  auto check_const = [](double v, const char* name) {
    if (v < 0.05 || v > 0.95)
      fail(ErrorCode::InfeasibleSpec, std::string(name) + " outside [0.05, 0.95]");
  };
  if (spec.setting == Setting::CS5 || spec.setting == Setting::PA2)
    check_const(spec.p_d_const, "p_d");
  if (spec.setting == Setting::CS3 || spec.setting == Setting::CS4 ||
      spec.setting == Setting::CS5)
    check_const(spec.p_t_const, "p_t");

  // propensity bounds on a fixed pre-sample
  std::mt19937_64 gen(0x70726573616d70ULL);
  std::normal_distribution<double> normal;
  const int draws = 100000;
  int violations = 0;
  for (int i = 0; i < draws; ++i) {
    const double x1 = normal(gen);
    auto flag = [&](double prob) {
      if (prob < 0.05 || prob > 0.95) ++violations;
    };
    switch (spec.setting) {
      case Setting::CS1: {
        double cells[2][2];
        cs1_cells(spec, x1, cells);
        for (int d = 0; d < 2; ++d)
          for (int t = 0; t < 2; ++t) flag(cells[d][t]);
        break;
      }
      case Setting::CS2:
        flag(sigmoid(index_at(spec.pd_index, x1)));
        flag(sigmoid(index_at(spec.pt_index, x1)));
        break;
      case Setting::CS3:
        flag(sigmoid(index_at(spec.pd_index_t[0], x1)));
        flag(sigmoid(index_at(spec.pd_index_t[1], x1)));
        break;
      case Setting::CS4:
      case Setting::PA1:
        flag(sigmoid(index_at(spec.pd_index, x1)));
        break;
      case Setting::CS5:
      case Setting::PA2:
        break;
    }
  }
  if (violations > draws / 1000)
    fail(ErrorCode::InfeasibleSpec,
         "propensity bounds violated for more than 0.1% of the pre-sample");
}

CrossSectionDataset generate_cross_section(const DgpSpec& spec) {
  if (is_panel(spec.setting))
    fail(ErrorCode::InfeasibleSpec, "panel setting in generate_cross_section");
  validate_spec(spec);
  const int n = spec.n;
  std::mt19937_64 gen(derive_seed(spec.seed, 0x63737367656eULL));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  LinearFunction means[2][2];
  for (int dd = 0; dd < 2; ++dd)
    for (int tt = 0; tt < 2; ++tt) means[dd][tt] = cell_mean(spec, dd, tt);

  Eigen::MatrixXd x(n, spec.p);
  Eigen::VectorXi d(n), t(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < spec.p; ++j) x(i, j) = normal(gen);
    const double x1 = x(i, 0);
    switch (spec.setting) {
      case Setting::CS1: {
        double cells[2][2];
        cs1_cells(spec, x1, cells);
        const double u = uniform(gen);
        double cum = 0.0;
        int cell = 3;
        int c = 0;
        for (int dd = 0; dd < 2 && c <= 3; ++dd)
          for (int tt = 0; tt < 2; ++tt, ++c) {
            cum += cells[dd][tt];
            if (u < cum) {
              cell = c;
              dd = 2;
              break;
            }
          }
        d[i] = cell / 2;
        t[i] = cell % 2;
        break;
      }
      case Setting::CS2:
        d[i] = uniform(gen) < sigmoid(index_at(spec.pd_index, x1)) ? 1 : 0;
        t[i] = uniform(gen) < sigmoid(index_at(spec.pt_index, x1)) ? 1 : 0;
        break;
      case Setting::CS3:
        t[i] = uniform(gen) < spec.p_t_const ? 1 : 0;
        d[i] = uniform(gen) < sigmoid(index_at(spec.pd_index_t[t[i]], x1)) ? 1 : 0;
        break;
      case Setting::CS4:
        d[i] = uniform(gen) < sigmoid(index_at(spec.pd_index, x1)) ? 1 : 0;
        t[i] = uniform(gen) < spec.p_t_const ? 1 : 0;
        break;
      case Setting::CS5:
        d[i] = uniform(gen) < spec.p_d_const ? 1 : 0;
        t[i] = uniform(gen) < spec.p_t_const ? 1 : 0;
        break;
      default:
        break;
    }
    y[i] = means[d[i]][t[i]](x.row(i)) + spec.sigma * normal(gen);
  }
  return validate_cross_section(std::move(y), std::move(d), std::move(t),
                                std::move(x));
}

PanelDataset generate_panel(const DgpSpec& spec) {
  if (!is_panel(spec.setting))
    fail(ErrorCode::InfeasibleSpec, "cross-section setting in generate_panel");
  validate_spec(spec);
  const int n = spec.n;
  std::mt19937_64 gen(derive_seed(spec.seed, 0x706167656eULL));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Eigen::MatrixXd x(n, spec.p);
  Eigen::VectorXi d(n);
  Eigen::VectorXd y0(n), y1(n);
  const double cross = spec.rho;
  const double resid = std::sqrt(std::max(0.0, 1.0 - cross * cross));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < spec.p; ++j) x(i, j) = normal(gen);
    const double x1 = x(i, 0);
    const double pd = spec.setting == Setting::PA1
                          ? sigmoid(index_at(spec.pd_index, x1))
                          : spec.p_d_const;
    d[i] = uniform(gen) < pd ? 1 : 0;
    const double z0 = normal(gen);
    const double z1 = normal(gen);
    const double e0 = spec.sigma * z0;
    const double e1 = spec.sigma * (cross * z0 + resid * z1);
    const Eigen::VectorXd xi = x.row(i);
    const double level = spec.base(xi) + d[i] * spec.group(xi);
    y0[i] = level + e0;
    y1[i] = level + spec.trend(xi) + d[i] * spec.effect(xi) + e1;
  }
  return validate_panel(std::move(y0), std::move(y1), std::move(d), std::move(x));
}

OracleNuisances oracle_nuisances(const DgpSpec& spec) {
  validate_spec(spec);
  OracleNuisances o;
  o.setting = spec.setting;
  o.theta_true = spec.theta_true();

  switch (spec.setting) {
    case Setting::CS1: {
      for (int d = 0; d < 2; ++d)
        for (int t = 0; t < 2; ++t) {
          o.cell_prop[d][t] = [spec, d, t](const Eigen::VectorXd& x) {
            double cells[2][2];
            cs1_cells(spec, x.size() > 0 ? x[0] : 0.0, cells);
            return cells[d][t];
          };
          o.cell_prob[d][t] = gauss_mean([&](double z) {
            double cells[2][2];
            cs1_cells(spec, z, cells);
            return cells[d][t];
          });
        }
      break;
    }
    case Setting::CS2: {
      const LinearFunction pd = spec.pd_index, pt = spec.pt_index;
      o.p_d_x = [pd](const Eigen::VectorXd& x) {
        return sigmoid(index_at(pd, x.size() > 0 ? x[0] : 0.0));
      };
      o.p_t_x = [pt](const Eigen::VectorXd& x) {
        return sigmoid(index_at(pt, x.size() > 0 ? x[0] : 0.0));
      };
      for (int d = 0; d < 2; ++d)
        for (int t = 0; t < 2; ++t)
          o.cell_prob[d][t] = gauss_mean([&](double z) {
            const double a = sigmoid(index_at(pd, z));
            const double b = sigmoid(index_at(pt, z));
            return (d ? a : 1.0 - a) * (t ? b : 1.0 - b);
          });
      break;
    }
    case Setting::CS3: {
      for (int t = 0; t < 2; ++t) {
        const LinearFunction idx = spec.pd_index_t[t];
        o.p_d_given_t[t] = [idx](const Eigen::VectorXd& x) {
          return sigmoid(index_at(idx, x.size() > 0 ? x[0] : 0.0));
        };
        const double pd_t =
            gauss_mean([&](double z) { return sigmoid(index_at(idx, z)); });
        const double pt = t ? spec.p_t_const : 1.0 - spec.p_t_const;
        o.cell_prob[1][t] = pd_t * pt;
        o.cell_prob[0][t] = (1.0 - pd_t) * pt;
      }
      break;
    }
    case Setting::CS4:
    case Setting::PA1: {
      const LinearFunction pd = spec.pd_index;
      o.p_d_x = [pd](const Eigen::VectorXd& x) {
        return sigmoid(index_at(pd, x.size() > 0 ? x[0] : 0.0));
      };
      const double marg =
          gauss_mean([&](double z) { return sigmoid(index_at(pd, z)); });
      if (spec.setting == Setting::CS4) {
        for (int d = 0; d < 2; ++d)
          for (int t = 0; t < 2; ++t)
            o.cell_prob[d][t] = (d ? marg : 1.0 - marg) *
                                (t ? spec.p_t_const : 1.0 - spec.p_t_const);
      } else {
        o.p_d = marg;
      }
      break;
    }
    case Setting::CS5:
      for (int d = 0; d < 2; ++d)
        for (int t = 0; t < 2; ++t)
          o.cell_prob[d][t] = (d ? spec.p_d_const : 1.0 - spec.p_d_const) *
                              (t ? spec.p_t_const : 1.0 - spec.p_t_const);
      break;
    case Setting::PA2:
      o.p_d = spec.p_d_const;
      break;
  }

  if (!is_panel(spec.setting)) {
    o.p_d = o.cell_prob[1][0] + o.cell_prob[1][1];
    o.p_t = o.cell_prob[0][1] + o.cell_prob[1][1];
    o.p_dt = o.cell_prob[1][1];
    o.p_d1 = o.p_dt / o.p_t;
    fill_outcome_oracle(spec, o);

    // derived factorizations so every variant has its oracle
    if (spec.setting == Setting::CS1) {
      const std::array<std::array<NuisanceFn, 2>, 2> cell = {
          {{o.cell_prop[0][0], o.cell_prop[0][1]},
           {o.cell_prop[1][0], o.cell_prop[1][1]}}};
      o.p_d_x = [cell](const Eigen::VectorXd& x) {
        return cell[1][0](x) + cell[1][1](x);
      };
      o.p_t_x = [cell](const Eigen::VectorXd& x) {
        return cell[0][1](x) + cell[1][1](x);
      };
      for (int t = 0; t < 2; ++t)
        o.p_d_given_t[t] = [cell, t](const Eigen::VectorXd& x) {
          return cell[1][t](x) / (cell[0][t](x) + cell[1][t](x));
        };
      for (int d = 0; d < 2; ++d)
        o.p_t_given_d[d] = [cell, d](const Eigen::VectorXd& x) {
          return cell[d][1](x) / (cell[d][0](x) + cell[d][1](x));
        };
    } else {
      NuisanceFn pd_x = o.p_d_x, pt_x = o.p_t_x;
      switch (spec.setting) {
        case Setting::CS3: {
          const NuisanceFn pd0 = o.p_d_given_t[0], pd1 = o.p_d_given_t[1];
          const double pt = spec.p_t_const;
          pd_x = [pd0, pd1, pt](const Eigen::VectorXd& x) {
            return pt * pd1(x) + (1.0 - pt) * pd0(x);
          };
          pt_x = constant_fn(pt);
          o.p_d_x = pd_x;
          o.p_t_x = pt_x;
          for (int d = 0; d < 2; ++d)
            o.p_t_given_d[d] = [pd0, pd1, pt, d](const Eigen::VectorXd& x) {
              const double q1 = (d ? pd1(x) : 1.0 - pd1(x)) * pt;
              const double q0 = (d ? pd0(x) : 1.0 - pd0(x)) * (1.0 - pt);
              return q1 / (q0 + q1);
            };
          break;
        }
        case Setting::CS4:
          pt_x = constant_fn(spec.p_t_const);
          o.p_t_x = pt_x;
          break;
        case Setting::CS5:
          pd_x = constant_fn(spec.p_d_const);
          pt_x = constant_fn(spec.p_t_const);
          o.p_d_x = pd_x;
          o.p_t_x = pt_x;
          break;
        default:
          break;
      }
      if (spec.setting != Setting::CS3) {
        for (int t = 0; t < 2; ++t) o.p_d_given_t[t] = pd_x;
        for (int d = 0; d < 2; ++d) o.p_t_given_d[d] = pt_x;
      }
      for (int d = 0; d < 2; ++d)
        for (int t = 0; t < 2; ++t)
          o.cell_prop[d][t] = [pd_x, pt_x, d, t](const Eigen::VectorXd& x) {
            const double a = pd_x(x), b = pt_x(x);
            return (d ? a : 1.0 - a) * (t ? b : 1.0 - b);
          };
    }
  } else {
    if (spec.setting == Setting::PA2) o.p_d_x = constant_fn(spec.p_d_const);
    const LinearFunction trend = spec.trend;
    const LinearFunction drift = sum3(spec.trend, spec.effect);
    o.m_dy[0] = linear_fn(trend);
    o.m_dy[1] = linear_fn(drift);
    const double vs = 2.0 * spec.sigma * spec.sigma * (1.0 + spec.rho);
    o.var_sum[0] = constant_fn(vs);
    o.var_sum[1] = constant_fn(vs);
  }
  return o;
}

CrossSectionDataset cross_section_view(const PanelDataset& panel,
                                       std::uint64_t seed) {
  const int n = panel.n();
  std::mt19937_64 gen(derive_seed(seed, 0x76696577ULL));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXi t(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    t[i] = uniform(gen) < 0.5 ? 1 : 0;
    y[i] = t[i] ? panel.y1[i] : panel.y0[i];
  }
  return validate_cross_section(std::move(y), panel.d, std::move(t), panel.x);
}

OracleNuisances cross_section_view_oracle(const DgpSpec& panel_spec) {
  if (!is_panel(panel_spec.setting))
    fail(ErrorCode::InfeasibleSpec, "cross-section view requires a panel spec");
  const OracleNuisances pa = oracle_nuisances(panel_spec);
  OracleNuisances o;
  o.setting = Setting::CS1;
  o.theta_true = pa.theta_true;
  const NuisanceFn pd_x = pa.p_d_x;
  o.p_d_x = pd_x;
  o.p_t_x = constant_fn(0.5);
  for (int t = 0; t < 2; ++t) o.p_d_given_t[t] = pd_x;
  for (int d = 0; d < 2; ++d) o.p_t_given_d[d] = constant_fn(0.5);
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t) {
      o.cell_prop[d][t] = [pd_x, d](const Eigen::VectorXd& x) {
        const double a = pd_x(x);
        return 0.5 * (d ? a : 1.0 - a);
      };
      o.cell_prob[d][t] = 0.5 * (d ? pa.p_d : 1.0 - pa.p_d);
    }
  o.p_d = pa.p_d;
  o.p_t = 0.5;
  o.p_dt = 0.5 * pa.p_d;
  o.p_d1 = pa.p_d;
  fill_outcome_oracle(panel_spec, o);
  return o;
}

namespace {

NuisanceEstimates base_estimates(const OracleNuisances& o, int n) {
  NuisanceEstimates est;
  est.n = n;
  est.p_d = o.p_d;
  est.p_t = o.p_t;
  est.p_dt = o.p_dt;
  est.p_d1 = o.p_d1;
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t) est.cell_freq[d][t] = o.cell_prob[d][t];
  return est;
}

}  // namespace

NuisanceEstimates OracleNuisances::evaluate(const CrossSectionDataset& data,
                                            Setting setting, Variant variant,
                                            bool include_optional) const {
  const NuisanceRequirement req = required_nuisances(setting, variant);
  NuisanceEstimates est = base_estimates(*this, data.n());
  if (req.cell_prop)
    for (int d = 0; d < 2; ++d)
      for (int t = 0; t < 2; ++t) {
        apply_fn(cell_prop[d][t], data.x, est.cell_prop[d][t], "cell propensity");
        track_probs(est.cell_prop[d][t], est);
      }
  if (req.p_d_x) {
    apply_fn(p_d_x, data.x, est.p_d_x, "p_D(x)");
    track_probs(est.p_d_x, est);
  }
  if (req.p_t_x) {
    apply_fn(p_t_x, data.x, est.p_t_x, "p_T(x)");
    track_probs(est.p_t_x, est);
  }
  for (int t = 0; t < 2; ++t)
    if (req.p_d_given_t[t]) {
      apply_fn(p_d_given_t[t], data.x, est.p_d_given_t[t], "p_D(t,x)");
      track_probs(est.p_d_given_t[t], est);
    }
  for (int d = 0; d < 2; ++d)
    if (req.p_t_given_d[d]) {
      apply_fn(p_t_given_d[d], data.x, est.p_t_given_d[d], "p_T(d,x)");
      track_probs(est.p_t_given_d[d], est);
    }
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t)
      if (req.m_y[d][t] || (include_optional && req.m_y_optional[d][t] && m_y[d][t]))
        apply_fn(m_y[d][t], data.x, est.m_y[d][t], "m_Y(d,t,x)");
  return est;
}

NuisanceEstimates OracleNuisances::evaluate(const PanelDataset& data,
                                            Setting setting, Variant variant,
                                            bool include_optional) const {
  const NuisanceRequirement req = required_nuisances(setting, variant);
  NuisanceEstimates est = base_estimates(*this, data.n());
  if (req.p_d_x) {
    apply_fn(p_d_x, data.x, est.p_d_x, "p_D(x)");
    track_probs(est.p_d_x, est);
  }
  for (int d = 0; d < 2; ++d)
    if (req.m_dy[d] || (include_optional && req.m_dy_optional[d] && m_dy[d]))
      apply_fn(m_dy[d], data.x, est.m_dy[d], "m_dY(d,x)");
  return est;
}

OracleNuisances misspecify(const OracleNuisances& oracle,
                           const std::string& target, MisspecMode mode) {
  OracleNuisances out = oracle;
  NuisanceFn* fn = nullptr;
  bool probability = true;
  if (target == "p_d_x") {
    fn = &out.p_d_x;
  } else if (target == "p_t_x") {
    fn = &out.p_t_x;
  } else if (target == "p_d_given_t_0" || target == "p_d_given_t_1") {
    fn = &out.p_d_given_t[target.back() - '0'];
  } else if (target == "p_t_given_d_0" || target == "p_t_given_d_1") {
    fn = &out.p_t_given_d[target.back() - '0'];
  } else if (target.rfind("cell_", 0) == 0 && target.size() == 8 &&
             (target[5] == '0' || target[5] == '1') && target[6] == '_' &&
             (target[7] == '0' || target[7] == '1')) {
    fn = &out.cell_prop[target[5] - '0'][target[7] - '0'];
  } else if (target.rfind("m_y_", 0) == 0 && target.size() == 7 &&
             (target[4] == '0' || target[4] == '1') && target[5] == '_' &&
             (target[6] == '0' || target[6] == '1')) {
    fn = &out.m_y[target[4] - '0'][target[6] - '0'];
    probability = false;
  } else if (target == "m_dy_0" || target == "m_dy_1") {
    fn = &out.m_dy[target.back() - '0'];
    probability = false;
  } else {
    fail(ErrorCode::UnknownTarget, "unknown nuisance target " + target);
  }
  if (!*fn) fail(ErrorCode::UnknownTarget, target + " is not set in this oracle");

  const NuisanceFn original = *fn;
  switch (mode) {
    case MisspecMode::Constant: {
      // population mean; selection acts through the first covariate and
      // regressions are linear, so a 1-d integral is exact
      const double c = gauss_mean([&](double z) {
        Eigen::VectorXd x(1);
        x[0] = z;
        return original(x);
      });
      *fn = constant_fn(c);
      break;
    }
    case MisspecMode::WrongLink:
      if (probability) {
        *fn = [original](const Eigen::VectorXd& x) {
          const double p = original(x);
          const double z = std::log(p / (1.0 - p));
          return 0.5 + std::atan(z) / M_PI;
        };
      } else {
        const double center = original(Eigen::VectorXd());
        *fn = [original, center](const Eigen::VectorXd& x) {
          const double dev = original(x) - center;
          return center + 0.5 * dev + 0.3 * dev * dev;
        };
      }
      break;
    case MisspecMode::OmitCovariate:
      *fn = [original](const Eigen::VectorXd& x) {
        Eigen::VectorXd z = x;
        if (z.size() > 0) z[0] = 0.0;
        return original(z);
      };
      break;
  }
  return out;
}

}  // namespace did
