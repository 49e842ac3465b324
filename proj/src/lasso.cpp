#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "did/data_model.hpp"
#include "did/nuisance.hpp"

namespace did {

namespace {

inline double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

inline double sigmoid(double z) {
  z = std::clamp(z, -36.0, 36.0);
  return 1.0 / (1.0 + std::exp(-z));
}

struct Standardized {
  Eigen::MatrixXd xs;          // kept columns, mean 0 / sd 1
  std::vector<int> kept;       // original column indices
  Eigen::VectorXd mean, scale; // for kept columns
};

Standardized standardize_drop_constant(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  Standardized s;
  std::vector<double> means, scales;
  for (int j = 0; j < p; ++j) {
    const double m = x.col(j).mean();
    const double var = (x.col(j).array() - m).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd > 1e-12) {
      s.kept.push_back(j);
      means.push_back(m);
      scales.push_back(sd);
    }
  }
  const int q = static_cast<int>(s.kept.size());
  s.xs.resize(n, q);
  s.mean.resize(q);
  s.scale.resize(q);
  for (int j = 0; j < q; ++j) {
    s.mean[j] = means[j];
    s.scale[j] = scales[j];
    s.xs.col(j) = (x.col(s.kept[j]).array() - means[j]) / scales[j];
  }
  return s;
}

double lasso_objective(const Eigen::VectorXd& resid, const Eigen::VectorXd& beta,
                       double lambda, int n) {
  return 0.5 * resid.squaredNorm() / n + lambda * beta.lpNorm<1>();
}

// One full pass of cyclic coordinate descent on standardized columns.
// Returns the max absolute coefficient change.
double cd_sweep(const Eigen::MatrixXd& xs, Eigen::VectorXd& resid,
                Eigen::VectorXd& beta, double lambda, int n) {
  double max_change = 0.0;
  for (int j = 0; j < xs.cols(); ++j) {
    const double old = beta[j];
    const double rho = xs.col(j).dot(resid) / n + old;
    const double next = soft_threshold(rho, lambda);
    if (next != old) {
      resid += xs.col(j) * (old - next);
      beta[j] = next;
      max_change = std::max(max_change, std::abs(next - old));
    }
  }
  return max_change;
}

// Linear lasso at a single lambda, warm-started; yc is the centered response.
void solve_linear(const Eigen::MatrixXd& xs, const Eigen::VectorXd& yc,
                  double lambda, Eigen::VectorXd& beta, double tol) {
  const int n = static_cast<int>(xs.rows());
  Eigen::VectorXd resid = yc - xs * beta;
  double obj = lasso_objective(resid, beta, lambda, n);
  for (int sweep = 0; sweep < 2000; ++sweep) {
    const double change = cd_sweep(xs, resid, beta, lambda, n);
    const double next_obj = lasso_objective(resid, beta, lambda, n);
    // penalized loss is non-increasing across sweeps
    assert(next_obj <= obj + 1e-9 * (1.0 + std::abs(obj)));
    obj = next_obj;
    if (change < tol) break;
  }
}

// Logistic lasso via IRLS with a penalized weighted least squares inner loop.
void solve_logistic(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
                    double lambda, double& intercept, Eigen::VectorXd& beta,
                    double tol) {
  const int n = static_cast<int>(xs.rows());
  const int q = static_cast<int>(xs.cols());
  for (int outer = 0; outer < 50; ++outer) {
    Eigen::VectorXd eta = (xs * beta).array() + intercept;
    Eigen::VectorXd prob = eta.unaryExpr([](double z) { return sigmoid(z); });
    Eigen::VectorXd w = (prob.array() * (1.0 - prob.array())).cwiseMax(1e-5);
    Eigen::VectorXd z = eta + (y - prob).cwiseQuotient(w);
    const double wsum = w.sum();

    Eigen::VectorXd resid = z - eta;
    double max_change_outer = 0.0;
    for (int sweep = 0; sweep < 200; ++sweep) {
      double max_change = 0.0;
      // intercept (unpenalized)
      {
        const double delta = w.dot(resid) / wsum;
        if (delta != 0.0) {
          intercept += delta;
          resid.array() -= delta;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      for (int j = 0; j < q; ++j) {
        const double denom = w.dot(xs.col(j).cwiseProduct(xs.col(j))) / n;
        const double old = beta[j];
        const double rho =
            xs.col(j).cwiseProduct(w).dot(resid) / n + denom * old;
        const double next = soft_threshold(rho, lambda) / denom;
        if (next != old) {
          resid += xs.col(j) * (old - next);
          beta[j] = next;
          max_change = std::max(max_change, std::abs(next - old));
        }
      }
      max_change_outer = std::max(max_change_outer, max_change);
      if (max_change < tol) break;
    }
    Eigen::VectorXd new_eta = (xs * beta).array() + intercept;
    if ((new_eta - eta).lpNorm<Eigen::Infinity>() < tol * 10) break;
    (void)max_change_outer;
  }
}

struct PathResult {
  // coefficients per lambda on standardized scale
  std::vector<Eigen::VectorXd> betas;
  std::vector<double> intercepts;  // on the original y scale
};

Eigen::VectorXd make_lambda_path(double lambda_max, const LearnerSpec& spec) {
  const int L = spec.n_lambda;
  Eigen::VectorXd path(L);
  if (L == 1) {
    path[0] = lambda_max;
    return path;
  }
  const double ratio = spec.lambda_min_ratio;
  for (int i = 0; i < L; ++i)
    path[i] = lambda_max * std::pow(ratio, static_cast<double>(i) / (L - 1));
  return path;
}

PathResult fit_path(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
                    LassoFamily family, const Eigen::VectorXd& lambdas) {
  const int q = static_cast<int>(xs.cols());
  PathResult res;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  if (family == LassoFamily::Linear) {
    const double ybar = y.mean();
    const Eigen::VectorXd yc = y.array() - ybar;
    const double tol = 1e-7 * std::max(1.0, std::sqrt(yc.squaredNorm() / y.size()));
    for (int l = 0; l < lambdas.size(); ++l) {
      solve_linear(xs, yc, lambdas[l], beta, tol);
      res.betas.push_back(beta);
      res.intercepts.push_back(ybar);  // standardized columns have mean zero
    }
  } else {
    const double ybar = y.mean();
    double intercept = std::log(std::max(ybar, 1e-12) / std::max(1.0 - ybar, 1e-12));
    for (int l = 0; l < lambdas.size(); ++l) {
      solve_logistic(xs, y, lambdas[l], intercept, beta, 1e-7);
      res.betas.push_back(beta);
      res.intercepts.push_back(intercept);
    }
  }
  return res;
}

double validation_loss(const Eigen::MatrixXd& xs_val, const Eigen::VectorXd& y_val,
                       const Eigen::VectorXd& beta, double intercept,
                       LassoFamily family) {
  Eigen::VectorXd eta = (xs_val * beta).array() + intercept;
  if (family == LassoFamily::Linear) return (y_val - eta).squaredNorm() / y_val.size();
  double dev = 0.0;
  for (int i = 0; i < y_val.size(); ++i) {
    const double p = std::clamp(sigmoid(eta[i]), 1e-8, 1.0 - 1e-8);
    dev += -2.0 * (y_val[i] * std::log(p) + (1.0 - y_val[i]) * std::log(1.0 - p));
  }
  return dev / y_val.size();
}

}  // namespace

LassoFit fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   LassoFamily family, const LearnerSpec& spec,
                   std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (y.size() != n) fail(ErrorCode::InconsistentDimension, "response length mismatch");

  Eigen::MatrixXd design = x;
  if (spec.expand && p > 0)
    design = expand_features(x, spec.expand_degree, spec.expand_interactions,
                             spec.expand_cap);

  Standardized s = standardize_drop_constant(design);
  if (s.kept.empty() && design.cols() > 0)
    fail(ErrorCode::DegeneratePath, "every feature column is constant");

  LassoFit fit;
  fit.family = family;
  fit.coef = Eigen::VectorXd::Zero(p);

  const double ybar = y.mean();
  const Eigen::VectorXd yc = y.array() - ybar;

  // lambda_max: smallest lambda that zeroes every penalized coefficient
  double lambda_max = 0.0;
  for (int j = 0; j < s.xs.cols(); ++j)
    lambda_max = std::max(lambda_max, std::abs(s.xs.col(j).dot(yc)) / n);

  auto finish = [&](const Eigen::VectorXd& beta_std, double intercept,
                    double lambda) {
    fit.lambda = lambda;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(design.cols());
    double shift = 0.0;
    for (size_t j = 0; j < s.kept.size(); ++j) {
      const double b = beta_std[j] / s.scale[j];
      full[s.kept[j]] = b;
      shift += b * s.mean[j];
    }
    fit.intercept = intercept - shift;
    if (spec.expand && p > 0) {
      fit.expanded_coef = full;
      fit.expand_degree = spec.expand_degree;
      fit.expand_interactions = spec.expand_interactions;
      fit.expand_cap = spec.expand_cap;
      fit.coef = full.head(p);  // convenience view of the linear part
    } else {
      fit.coef = full;
    }
  };

  if (s.kept.empty() || lambda_max < 1e-14) {
    // constant response (or no usable columns with a constant y): intercept only
    fit.intercept = family == LassoFamily::Linear
                        ? ybar
                        : std::log(std::max(ybar, 1e-12) / std::max(1.0 - ybar, 1e-12));
    fit.lambda = 0.0;
    fit.coef = Eigen::VectorXd::Zero(design.cols());
    if (spec.expand && p > 0) {
      fit.expanded_coef = fit.coef;
      fit.expand_degree = spec.expand_degree;
      fit.expand_interactions = spec.expand_interactions;
      fit.expand_cap = spec.expand_cap;
      fit.coef = Eigen::VectorXd::Zero(p);
    }
    return fit;
  }

  if (spec.lambda_at_max || spec.lambda_override >= 0.0) {
    const double target = spec.lambda_at_max ? lambda_max : spec.lambda_override;
    // warm start down the path to the target for stability
    std::vector<double> lams;
    const double floor_l = std::max(target, lambda_max * 1e-4);
    for (double l = lambda_max; l > floor_l * 1.0001; l *= 0.5) lams.push_back(l);
    lams.push_back(target);
    Eigen::VectorXd lambdas =
        Eigen::Map<Eigen::VectorXd>(lams.data(), static_cast<int>(lams.size()));
    PathResult res = fit_path(s.xs, y, family, lambdas);
    fit.lambda_path.resize(1);
    fit.lambda_path[0] = target;
    finish(res.betas.back(), res.intercepts.back(), target);
    return fit;
  }

  // cross-validated lambda on a geometric path
  Eigen::VectorXd lambdas = make_lambda_path(lambda_max, spec);
  const int folds = std::min(spec.cv_folds, n);
  if (folds < 2 || n < spec.cv_folds)
    fail(ErrorCode::Usage, "need n >= cv_folds for cross-validation");
  FoldPartition part = partition_folds(n, folds, derive_seed(seed, 0x63764c61ULL));

  Eigen::VectorXd cv = Eigen::VectorXd::Zero(lambdas.size());
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train = part.complement_indices(f);
    std::vector<int> val = part.fold_indices(f);
    Eigen::MatrixXd xtr(train.size(), design.cols());
    Eigen::VectorXd ytr(train.size());
    for (size_t i = 0; i < train.size(); ++i) {
      xtr.row(i) = design.row(train[i]);
      ytr[i] = y[train[i]];
    }
    Standardized st = standardize_drop_constant(xtr);
    if (st.kept.empty()) continue;
    PathResult res = fit_path(st.xs, ytr, family, lambdas);

    Eigen::MatrixXd xval(val.size(), st.kept.size());
    Eigen::VectorXd yval(val.size());
    for (size_t i = 0; i < val.size(); ++i) {
      for (size_t j = 0; j < st.kept.size(); ++j)
        xval(i, j) = (design(val[i], st.kept[j]) - st.mean[j]) / st.scale[j];
      yval[i] = y[val[i]];
    }
    for (int l = 0; l < lambdas.size(); ++l)
      cv[l] += validation_loss(xval, yval, res.betas[l], res.intercepts[l], family) *
               val.size();
  }
  cv /= n;

  int best = 0;
  cv.minCoeff(&best);
  fit.lambda_path = lambdas;
  fit.cv_loss = cv;

  PathResult res = fit_path(s.xs, y, family, lambdas.head(best + 1));
  finish(res.betas.back(), res.intercepts.back(), lambdas[best]);
  return fit;
}

Eigen::VectorXd LassoFit::predict(const Eigen::MatrixXd& x) const {
  if (expanded_coef.size() > 0) {
    Eigen::MatrixXd design =
        expand_features(x, expand_degree, expand_interactions, expand_cap);
    return (design * expanded_coef).array() + intercept;
  }
  return (x * coef).array() + intercept;
}

Eigen::VectorXd LassoFit::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd eta = predict(x);
  return eta.unaryExpr([](double z) { return sigmoid(z); });
}

}  // namespace did
