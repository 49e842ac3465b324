#include <algorithm>
#include <cmath>

#include "did/nuisance.hpp"

namespace did {

void FeatureMatrix::standardize() {
  const int nn = n();
  mean = values.colwise().mean();
  scale.resize(q());
  for (int j = 0; j < q(); ++j) {
    const double var = (values.col(j).array() - mean[j]).square().sum() / nn;
    scale[j] = std::sqrt(var);
  }
}

Eigen::MatrixXd expand_features(const Eigen::MatrixXd& x, int max_degree,
                                bool interactions, int column_cap) {
  if (max_degree < 1) fail(ErrorCode::Usage, "max_degree must be >= 1");
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const long q = static_cast<long>(p) + static_cast<long>(p) * (max_degree - 1) +
                 (interactions ? static_cast<long>(p) * (p - 1) / 2 : 0L);
  if (q > column_cap)
    fail(ErrorCode::DimensionOverflow,
         "expanded dimension " + std::to_string(q) + " exceeds cap " +
             std::to_string(column_cap));
  Eigen::MatrixXd out(n, q);
  long col = 0;
  for (int j = 0; j < p; ++j) out.col(col++) = x.col(j);
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd power = x.col(j);
    for (int deg = 2; deg <= max_degree; ++deg) {
      power = power.cwiseProduct(x.col(j));
      out.col(col++) = power;
    }
  }
  if (interactions)
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j)
        out.col(col++) = x.col(i).cwiseProduct(x.col(j));
  return out;
}

double clip_probability(double p, double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    fail(ErrorCode::Usage, "clipping eps must lie in (0, 0.5)");
  return std::min(std::max(p, eps), 1.0 - eps);
}

void LearnerSpec::validate() const {
  if (logit_max_iter < 1) fail(ErrorCode::Config, "logit_max_iter must be >= 1");
  if (n_lambda < 1) fail(ErrorCode::Config, "n_lambda must be >= 1");
  if (cv_folds < 2) fail(ErrorCode::Config, "cv_folds must be >= 2");
  if (trees < 1) fail(ErrorCode::Config, "trees must be >= 1");
  if (expand_degree < 1) fail(ErrorCode::Config, "expand_degree must be >= 1");
  if (ensemble_folds < 2) fail(ErrorCode::Config, "ensemble_folds must be >= 2");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio <= 1.0))
    fail(ErrorCode::Config, "lambda_min_ratio must lie in (0, 1]");
}

LearnerSpec learner_spec_from_name(const std::string& name) {
  LearnerSpec spec;
  if (name == "linear") {
    // logit propensities + unpenalized least squares regressions
    spec.family = LearnerFamily::Logistic;
  } else if (name == "lasso") {
    spec.family = LearnerFamily::LassoLinear;
    spec.expand = true;
  } else if (name == "forest") {
    spec.family = LearnerFamily::ForestRegression;
  } else if (name == "ensemble") {
    spec.family = LearnerFamily::Ensemble;
    spec.expand = true;
  } else {
    fail(ErrorCode::Usage, "unknown learner '" + name + "'");
  }
  return spec;
}

namespace {

Eigen::VectorXd project_simplex(Eigen::VectorXd v) {
  const int m = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0;
  double tau = 0.0;
  int rho = 0;
  for (int i = 0; i < m; ++i) {
    cssv += u[i];
    const double t = (cssv - 1.0) / (i + 1);
    if (u[i] - t > 0) {
      rho = i + 1;
      tau = t;
    }
  }
  (void)rho;
  for (int i = 0; i < m; ++i) v[i] = std::max(v[i] - tau, 0.0);
  return v;
}

}  // namespace

EnsembleWeights fit_ensemble_weights(const Eigen::MatrixXd& preds,
                                     const Eigen::VectorXd& targets) {
  const int n = static_cast<int>(preds.rows());
  const int m = static_cast<int>(preds.cols());
  if (m < 1 || n < 1) fail(ErrorCode::Usage, "need at least one model and one row");
  EnsembleWeights w;
  if (m == 1) {
    w.weights = Eigen::VectorXd::Ones(1);
    return w;
  }
  if (m == 2) {
    const Eigen::VectorXd u = preds.col(0) - preds.col(1);
    const Eigen::VectorXd v = targets - preds.col(1);
    const double uu = u.squaredNorm();
    double a = 0.5;  // identical columns: any point optimal, return (0.5, 0.5)
    if (uu > 1e-14 * n) a = std::clamp(u.dot(v) / uu, 0.0, 1.0);
    w.weights.resize(2);
    w.weights << a, 1.0 - a;
    return w;
  }
  // projected gradient on the simplex
  Eigen::MatrixXd gram = preds.transpose() * preds / n;
  Eigen::VectorXd b = preds.transpose() * targets / n;
  const double lip = 2.0 * gram.operatorNorm() + 1e-12;
  Eigen::VectorXd wv = Eigen::VectorXd::Constant(m, 1.0 / m);
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXd grad = 2.0 * (gram * wv - b);
    Eigen::VectorXd next = project_simplex(wv - grad / lip);
    if ((next - wv).lpNorm<Eigen::Infinity>() < 1e-12) {
      wv = next;
      break;
    }
    wv = next;
  }
  w.weights = wv;
  return w;
}

}  // namespace did
