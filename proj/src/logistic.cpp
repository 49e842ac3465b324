#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "did/nuisance.hpp"

namespace did {

namespace {

// Link values are clamped so probabilities stay strictly inside (0,1)
// even for (quasi-)separable data.
inline double sigmoid(double z) {
  z = std::clamp(z, -36.0, 36.0);
  return 1.0 / (1.0 + std::exp(-z));
}

double neg_log_lik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  // -loglik = sum log(1+exp(eta)) - y*eta, computed stably
  double s = 0.0;
  for (int i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    s += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y[i] * e;
  }
  return s;
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                         int max_iter, double ridge) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (labels.size() != n) fail(ErrorCode::InconsistentDimension, "label length mismatch");
  Eigen::VectorXd y(n);
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      fail(ErrorCode::NonBinaryIndicator, "labels must be 0/1");
    y[i] = labels[i];
    ones += labels[i];
  }
  if (ones == 0 || ones == n)
    fail(ErrorCode::SingleClass, "labels contain a single class");

  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = x;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  beta[0] = std::log(static_cast<double>(ones) / (n - ones));
  Eigen::VectorXd eta = design * beta;
  double nll = neg_log_lik(eta, y) + 0.5 * ridge * n * beta.tail(p).squaredNorm();

  LogisticFit fit;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd prob = eta.unaryExpr([](double z) { return sigmoid(z); });
    Eigen::VectorXd grad = design.transpose() * (y - prob);
    grad.tail(p) -= ridge * n * beta.tail(p);
    Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
    Eigen::MatrixXd hess = design.transpose() * w.asDiagonal() * design;
    hess.diagonal().array() += ridge * n;
    Eigen::VectorXd step = hess.ldlt().solve(grad);

    // step-halving keeps the likelihood non-increasing under quasi-separation
    double alpha = 1.0;
    Eigen::VectorXd cand;
    double cand_nll = nll;
    for (int h = 0; h < 30; ++h) {
      cand = beta + alpha * step;
      Eigen::VectorXd cand_eta = design * cand;
      cand_nll = neg_log_lik(cand_eta, y) +
                 0.5 * ridge * n * cand.tail(p).squaredNorm();
      if (cand_nll <= nll + 1e-12) {
        beta = cand;
        eta = cand_eta;
        break;
      }
      alpha *= 0.5;
    }
    fit.iterations = it + 1;
    const double improvement = nll - cand_nll;
    nll = std::min(nll, cand_nll);
    if (step.lpNorm<Eigen::Infinity>() * alpha < 1e-9 || improvement < 1e-10 * (1.0 + std::abs(nll)))
      break;
    if (it + 1 == max_iter)
      fail(ErrorCode::NoConvergence,
           "logit did not converge; last step norm " +
               std::to_string(step.lpNorm<Eigen::Infinity>()));
  }
  fit.intercept = beta[0];
  fit.coef = beta.tail(p);
  return fit;
}

Eigen::VectorXd LogisticFit::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd eta = (x * coef).array() + intercept;
  return eta.unaryExpr([](double z) { return sigmoid(z); });
}

}  // namespace did
