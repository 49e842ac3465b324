#include <algorithm>
#include <string>
#include <vector>

#include "did/crossfit.hpp"

namespace did {

namespace {

// Stream identifiers for per-nuisance seed derivation.
enum NuisanceId : std::uint64_t {
  IdCell00 = 0,
  IdCell01 = 1,
  IdCell10 = 2,
  IdCell11 = 3,
  IdPDx = 4,
  IdPTx = 5,
  IdPDgivenT0 = 6,
  IdPDgivenT1 = 7,
  IdPTgivenD0 = 8,
  IdPTgivenD1 = 9,
  IdMy00 = 10,
  IdMy01 = 11,
  IdMy10 = 12,
  IdMy11 = 13,
  IdMdy0 = 14,
  IdMdy1 = 15,
};

Eigen::MatrixXd subset_rows(const Eigen::MatrixXd& x, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), x.cols());
  for (size_t i = 0; i < idx.size(); ++i) out.row(i) = x.row(idx[i]);
  return out;
}

Eigen::VectorXd subset(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

Eigen::VectorXi subset(const Eigen::VectorXi& v, const std::vector<int>& idx) {
  Eigen::VectorXi out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

// The plain logit learner has no regression analogue; its regressions are
// unpenalized least squares (lasso at lambda = 0 on the raw covariates).
LearnerSpec regression_spec(const LearnerSpec& spec) {
  LearnerSpec out = spec;
  if (out.family == LearnerFamily::Logistic) {
    out.family = LearnerFamily::LassoLinear;
    out.lambda_override = 0.0;
    out.expand = false;
  } else if (out.family == LearnerFamily::LassoLogistic) {
    out.family = LearnerFamily::LassoLinear;
  } else if (out.family == LearnerFamily::ForestClassification) {
    out.family = LearnerFamily::ForestRegression;
  }
  return out;
}

struct Clipper {
  double eps;
  NuisanceEstimates* est;

  void apply(Eigen::VectorXd& probs) const {
    for (int i = 0; i < probs.size(); ++i) {
      const double clipped = clip_probability(probs[i], eps);
      if (clipped != probs[i]) ++est->clipped_count;
      probs[i] = clipped;
      est->min_prob = std::min(est->min_prob, clipped);
      est->max_prob = std::max(est->max_prob, clipped);
    }
  }
};

// Context shared by all per-fold fits: covariates, responses, fold layout.
struct FitContext {
  const Eigen::MatrixXd& x;
  const LearnerSpec& learner;
  FoldPartition part;
  std::uint64_t seed;

  std::vector<int> train_rows(int fold) const { return part.complement_indices(fold); }

  std::uint64_t fit_seed(int fold, NuisanceId id) const {
    return derive_seed(seed, static_cast<std::uint64_t>(fold), id);
  }
};

// Fit a probability model per fold on (a subsample of) the complement and
// predict on the fold's rows. `keep` selects training rows; empty keep-sets
// raise EmptyTrainingCell with `label`.
template <typename KeepFn>
Eigen::VectorXd crossfit_probability(const FitContext& ctx, const Eigen::VectorXi& labels,
                                     NuisanceId id, const std::string& label,
                                     KeepFn keep) {
  Eigen::VectorXd out(ctx.part.n);
  for (int f = 0; f < ctx.part.k; ++f) {
    std::vector<int> train;
    for (int i : ctx.train_rows(f))
      if (keep(i)) train.push_back(i);
    if (train.empty())
      fail(ErrorCode::EmptyTrainingCell,
           "fold " + std::to_string(f) + " complement has no rows for " + label);
    auto model = fit_probability(ctx.learner, subset_rows(ctx.x, train),
                                 subset(labels, train), ctx.fit_seed(f, id));
    const std::vector<int> val = ctx.part.fold_indices(f);
    Eigen::VectorXd pred = model->predict_proba(subset_rows(ctx.x, val));
    for (size_t i = 0; i < val.size(); ++i) out[val[i]] = pred[i];
  }
  return out;
}

template <typename KeepFn>
Eigen::VectorXd crossfit_regression(const FitContext& ctx, const Eigen::VectorXd& y,
                                    NuisanceId id, const std::string& label,
                                    KeepFn keep) {
  const LearnerSpec spec = regression_spec(ctx.learner);
  Eigen::VectorXd out(ctx.part.n);
  for (int f = 0; f < ctx.part.k; ++f) {
    std::vector<int> train;
    for (int i : ctx.train_rows(f))
      if (keep(i)) train.push_back(i);
    if (train.empty())
      fail(ErrorCode::EmptyTrainingCell,
           "fold " + std::to_string(f) + " complement has no rows for " + label);
    auto model = fit_regression(spec, subset_rows(ctx.x, train),
                                subset(y, train), ctx.fit_seed(f, id));
    const std::vector<int> val = ctx.part.fold_indices(f);
    Eigen::VectorXd pred = model->predict(subset_rows(ctx.x, val));
    for (size_t i = 0; i < val.size(); ++i) out[val[i]] = pred[i];
  }
  return out;
}

// Project four per-observation cell probabilities onto the simplex slice
// {p_i >= eps, sum p_i = 1}: rescale the mass above eps uniformly.
void normalize_cells(NuisanceEstimates& est, int n, double eps) {
  for (int i = 0; i < n; ++i) {
    double excess[4];
    double total = 0.0;
    int c = 0;
    for (int d = 0; d < 2; ++d)
      for (int t = 0; t < 2; ++t) {
        excess[c] = std::max(est.cell_prop[d][t][i] - eps, 0.0);
        total += excess[c];
        ++c;
      }
    c = 0;
    for (int d = 0; d < 2; ++d)
      for (int t = 0; t < 2; ++t) {
        const double share = total > 0.0 ? excess[c] / total : 0.25;
        est.cell_prop[d][t][i] = eps + (1.0 - 4.0 * eps) * share;
        ++c;
      }
  }
}

void check_options(const CrossfitOptions& options) {
  options.learner.validate();
  if (options.eps <= 0.0 || options.eps >= 0.25)
    fail(ErrorCode::Config, "clipping eps must lie in (0, 0.25)");
}

}  // namespace

NuisanceRequirement required_nuisances(Setting setting, Variant variant) {
  if (!compatible(setting, variant))
    fail(ErrorCode::IncompatiblePair,
         to_string(setting) + " does not support variant " + to_string(variant));
  NuisanceRequirement req;
  auto need_my_all = [&] {
    for (int d = 0; d < 2; ++d)
      for (int t = 0; t < 2; ++t) req.m_y[d][t] = true;
  };
  auto need_my_controls = [&] {
    // cells (0,0), (0,1), (1,0); m_Y(1,1,.) cancels against the D T / p_DT
    // adjustment term and is optional
    req.m_y[0][0] = req.m_y[0][1] = req.m_y[1][0] = true;
    req.m_y_optional[1][1] = true;
  };
  switch (setting) {
    case Setting::CS1:
      req.s_p_dt = true;
      need_my_controls();
      if (variant == Variant::Efficient) {
        req.cell_prop = true;
      } else if (variant == Variant::Star2) {
        req.p_d_given_t[0] = req.p_d_given_t[1] = true;
        req.p_t_x = true;
      } else {  // Star3
        req.p_t_given_d[0] = req.p_t_given_d[1] = true;
        req.p_d_x = true;
      }
      break;
    case Setting::CS2:
      req.s_p_dt = true;
      req.p_d_x = req.p_t_x = true;
      if (variant == Variant::Efficient)
        need_my_all();
      else  // PrimeCS2
        need_my_controls();
      break;
    case Setting::CS3:
      req.p_d_given_t[0] = req.p_d_given_t[1] = true;
      req.s_p_t = req.s_p_d1 = true;
      need_my_all();
      break;
    case Setting::CS4:
      req.p_d_x = true;
      req.s_p_d = req.s_p_t = true;
      if (variant == Variant::Efficient) {
        need_my_all();
      } else if (variant == Variant::PrimeCS4) {
        // treated-cell regressions cancel in psi'_CS-4
        req.m_y[0][0] = req.m_y[0][1] = true;
        req.m_y_optional[1][0] = req.m_y_optional[1][1] = true;
      }
      // IpwBenchmark: propensity and scalars only
      break;
    case Setting::CS5:
      req.s_p_d = req.s_p_t = true;
      if (variant == Variant::Efficient) need_my_all();
      // DiffMeans: scalars only
      break;
    case Setting::PA1:
      req.p_d_x = true;
      req.s_p_d = true;
      req.m_dy[0] = true;
      req.m_dy_optional[1] = true;  // cancels in psi*_PA-1
      break;
    case Setting::PA2:
      req.s_p_d = true;
      if (variant == Variant::Efficient) req.m_dy[0] = req.m_dy[1] = true;
      break;
  }
  return req;
}

void fill_scalars(const CrossSectionDataset& data, NuisanceEstimates& est) {
  const int n = data.n();
  int treated = 0, post = 0, post_treated = 0;
  for (int i = 0; i < n; ++i) {
    treated += data.d[i];
    post += data.t[i];
    post_treated += data.d[i] * data.t[i];
  }
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t) est.cell_freq[d][t] = data.cell_share(d, t);
  est.p_d = static_cast<double>(treated) / n;
  est.p_t = static_cast<double>(post) / n;
  est.p_dt = static_cast<double>(post_treated) / n;
  est.p_d1 = static_cast<double>(post_treated) / post;
  est.n = n;
}

void fill_scalars(const PanelDataset& data, NuisanceEstimates& est) {
  est.p_d = static_cast<double>(data.group_count(1)) / data.n();
  est.n = data.n();
}

NuisanceEstimates crossfit(const CrossSectionDataset& data, Setting setting,
                           Variant variant, const CrossfitOptions& options) {
  if (is_panel(setting))
    fail(ErrorCode::IncompatiblePair,
         to_string(setting) + " requires a panel dataset");
  check_options(options);
  const NuisanceRequirement req = required_nuisances(setting, variant);
  const int n = data.n();

  NuisanceEstimates est;
  fill_scalars(data, est);
  est.folds = options.k;
  est.seed = options.seed;
  est.eps = options.eps;

  FitContext ctx{data.x, options.learner,
                 partition_folds(n, options.k, derive_seed(options.seed, 0x666f6c64ULL)),
                 options.seed};
  Clipper clip{options.eps, &est};
  auto all_rows = [](int) { return true; };

  if (req.cell_prop) {
    for (int d = 0; d < 2; ++d)
      for (int t = 0; t < 2; ++t) {
        Eigen::VectorXi labels(n);
        for (int i = 0; i < n; ++i)
          labels[i] = (data.d[i] == d && data.t[i] == t) ? 1 : 0;
        est.cell_prop[d][t] = crossfit_probability(
            ctx, labels, static_cast<NuisanceId>(IdCell00 + 2 * d + t),
            "cell (" + std::to_string(d) + "," + std::to_string(t) + ")", all_rows);
      }
    normalize_cells(est, n, options.eps);
    for (int d = 0; d < 2; ++d)
      for (int t = 0; t < 2; ++t) clip.apply(est.cell_prop[d][t]);
  }
  if (req.p_d_x) {
    est.p_d_x = crossfit_probability(ctx, data.d, IdPDx, "p_D(x)", all_rows);
    clip.apply(est.p_d_x);
  }
  if (req.p_t_x) {
    est.p_t_x = crossfit_probability(ctx, data.t, IdPTx, "p_T(x)", all_rows);
    clip.apply(est.p_t_x);
  }
  for (int t = 0; t < 2; ++t)
    if (req.p_d_given_t[t]) {
      est.p_d_given_t[t] = crossfit_probability(
          ctx, data.d, t == 0 ? IdPDgivenT0 : IdPDgivenT1,
          "p_D(" + std::to_string(t) + ",x)",
          [&](int i) { return data.t[i] == t; });
      clip.apply(est.p_d_given_t[t]);
    }
  for (int d = 0; d < 2; ++d)
    if (req.p_t_given_d[d]) {
      est.p_t_given_d[d] = crossfit_probability(
          ctx, data.t, d == 0 ? IdPTgivenD0 : IdPTgivenD1,
          "p_T(" + std::to_string(d) + ",x)",
          [&](int i) { return data.d[i] == d; });
      clip.apply(est.p_t_given_d[d]);
    }
  for (int d = 0; d < 2; ++d)
    for (int t = 0; t < 2; ++t) {
      const bool fit =
          req.m_y[d][t] || (options.fit_redundant && req.m_y_optional[d][t]);
      if (!fit) continue;
      est.m_y[d][t] = crossfit_regression(
          ctx, data.y, static_cast<NuisanceId>(IdMy00 + 2 * d + t),
          "m_Y(" + std::to_string(d) + "," + std::to_string(t) + ",x)",
          [&](int i) { return data.d[i] == d && data.t[i] == t; });
    }
  return est;
}

NuisanceEstimates crossfit(const PanelDataset& data, Setting setting,
                           Variant variant, const CrossfitOptions& options) {
  if (!is_panel(setting))
    fail(ErrorCode::IncompatiblePair,
         to_string(setting) + " requires a cross-section dataset");
  check_options(options);
  const NuisanceRequirement req = required_nuisances(setting, variant);
  const int n = data.n();

  NuisanceEstimates est;
  fill_scalars(data, est);
  est.folds = options.k;
  est.seed = options.seed;
  est.eps = options.eps;

  FitContext ctx{data.x, options.learner,
                 partition_folds(n, options.k, derive_seed(options.seed, 0x666f6c64ULL)),
                 options.seed};
  Clipper clip{options.eps, &est};

  if (req.p_d_x) {
    est.p_d_x = crossfit_probability(ctx, data.d, IdPDx, "p_D(x)",
                                     [](int) { return true; });
    clip.apply(est.p_d_x);
  }
  const Eigen::VectorXd dy = data.delta_y();
  for (int d = 0; d < 2; ++d) {
    const bool fit = req.m_dy[d] || (options.fit_redundant && req.m_dy_optional[d]);
    if (!fit) continue;
    est.m_dy[d] = crossfit_regression(
        ctx, dy, d == 0 ? IdMdy0 : IdMdy1, "m_dY(" + std::to_string(d) + ",x)",
        [&](int i) { return data.d[i] == d; });
  }
  return est;
}

}  // namespace did
