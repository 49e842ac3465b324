#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "did/nuisance.hpp"
#include "doctest.h"

using namespace did;

namespace {

Eigen::MatrixXd gaussian_matrix(int n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
  return x;
}

}  // namespace

TEST_CASE("expand_features column counts and order") {
  Eigen::MatrixXd x = gaussian_matrix(10, 2, 1);
  SUBCASE("degree 2 with interactions") {
    auto out = expand_features(x, 2, true);
    CHECK(out.cols() == 5);  // 2 originals + 2 squares + 1 interaction
    CHECK(out.col(0) == x.col(0));
    CHECK(out.col(2) == x.col(0).cwiseProduct(x.col(0)));
    CHECK(out.col(4) == x.col(0).cwiseProduct(x.col(1)));
  }
  SUBCASE("degree 1 without interactions is the identity") {
    auto out = expand_features(x, 1, false);
    CHECK(out == x);
  }
  SUBCASE("count formula p + p(deg-1) + C(p,2)") {
    Eigen::MatrixXd x3 = gaussian_matrix(5, 3, 2);
    auto out = expand_features(x3, 4, true);
    CHECK(out.cols() == 3 + 9 + 3);
  }
  SUBCASE("cap produces DimensionOverflow") {
    CHECK_THROWS_AS(expand_features(x, 4, true, 3), DidError);
  }
}

TEST_CASE("clip_probability") {
  CHECK(clip_probability(0.0005, 0.01) == doctest::Approx(0.01));
  CHECK(clip_probability(0.5, 0.01) == doctest::Approx(0.5));
  CHECK(clip_probability(0.999, 0.01) == doctest::Approx(0.99));
  CHECK_THROWS_AS(clip_probability(0.5, 0.7), DidError);
}

TEST_CASE("logit: intercept-only model matches the sample mean exactly") {
  Eigen::MatrixXd x(10, 0);
  Eigen::VectorXi y(10);
  y << 1, 1, 1, 0, 0, 0, 0, 0, 0, 0;
  auto fit = fit_logistic(x, y);
  auto p = fit.predict_proba(x);
  for (int i = 0; i < 10; ++i) CHECK(p[i] == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("logit: separable data converges with predictions inside (0,1)") {
  Eigen::MatrixXd x(6, 1);
  x << -3, -2, -1, 1, 2, 3;
  Eigen::VectorXi y(6);
  y << 0, 0, 0, 1, 1, 1;
  auto fit = fit_logistic(x, y);
  auto p = fit.predict_proba(x);
  for (int i = 0; i < 6; ++i) {
    CHECK(p[i] > 0.0);
    CHECK(p[i] < 1.0);
  }
}

TEST_CASE("logit: recovers coefficients of a logistic DGP") {
  const int n = 50000;
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXi y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    const double p = 1.0 / (1.0 + std::exp(-(0.5 + x(i, 0))));
    y[i] = unif(rng) < p ? 1 : 0;
  }
  auto fit = fit_logistic(x, y);
  CHECK(std::abs(fit.intercept - 0.5) < 0.05);
  CHECK(std::abs(fit.coef[0] - 1.0) < 0.05);
}

TEST_CASE("logit: single class errors") {
  Eigen::MatrixXd x(4, 1);
  x.setZero();
  Eigen::VectorXi y = Eigen::VectorXi::Ones(4);
  CHECK_THROWS_AS(fit_logistic(x, y), DidError);
}

TEST_CASE("lasso: lambda at the top of the path gives the intercept-only model") {
  Eigen::MatrixXd x = gaussian_matrix(50, 3, 3);
  Eigen::VectorXd y = x.col(0) * 2.0 + Eigen::VectorXd::Random(50);
  LearnerSpec spec;
  spec.lambda_at_max = true;
  auto fit = fit_lasso(x, y, LassoFamily::Linear, spec, 1);
  auto pred = fit.predict(x);
  for (int i = 0; i < 50; ++i) CHECK(pred[i] == doctest::Approx(y.mean()).epsilon(1e-8));
}

TEST_CASE("lasso: lambda=0 on an orthonormal design equals the OLS solution") {
  const int n = 64;
  // orthonormalized Gaussian design (columns orthogonal, unit norm * sqrt(n))
  Eigen::MatrixXd raw = gaussian_matrix(n, 4, 4);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, 4);
  Eigen::MatrixXd x = q * std::sqrt(double(n));
  Eigen::VectorXd beta_true(4);
  beta_true << 1.0, -2.0, 0.5, 0.0;
  Eigen::VectorXd y = x * beta_true + 0.1 * gaussian_matrix(n, 1, 5);

  LearnerSpec spec;
  spec.lambda_override = 0.0;
  auto fit = fit_lasso(x, y, LassoFamily::Linear, spec, 1);

  // normal equations as the independent oracle
  Eigen::MatrixXd design(n, 5);
  design.col(0).setOnes();
  design.rightCols(4) = x;
  Eigen::VectorXd ols = (design.transpose() * design)
                            .ldlt()
                            .solve(design.transpose() * y);
  CHECK(std::abs(fit.intercept - ols[0]) < 1e-6);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(fit.coef[j] - ols[j + 1]) < 1e-6);
}

TEST_CASE("lasso: recovers a sparse signal among noise features") {
  const int n = 2000;
  const int p = 51;
  Eigen::MatrixXd x = gaussian_matrix(n, p, 6);
  Eigen::VectorXd noise = gaussian_matrix(n, 1, 7);
  Eigen::VectorXd y = 2.0 * x.col(0) + noise;
  LearnerSpec spec;
  auto fit = fit_lasso(x.topRows(1500), y.head(1500), LassoFamily::Linear, spec, 8);
  CHECK(std::abs(fit.coef[0]) > 0.5);  // true signal selected
  Eigen::VectorXd pred = fit.predict(x.bottomRows(500));
  const double mse = (y.tail(500) - pred).squaredNorm() / 500;
  const double var_y = (y.tail(500).array() - y.tail(500).mean()).square().mean();
  CHECK(mse < var_y);
}

TEST_CASE("lasso: every column constant is a degenerate path") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(20, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Random(20);
  LearnerSpec spec;
  spec.cv_folds = 2;
  CHECK_THROWS_AS(fit_lasso(x, y, LassoFamily::Linear, spec, 1), DidError);
}

TEST_CASE("lasso: constant response gives an intercept-only fit") {
  Eigen::MatrixXd x = gaussian_matrix(30, 2, 9);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 3.25);
  LearnerSpec spec;
  spec.cv_folds = 2;
  auto fit = fit_lasso(x, y, LassoFamily::Linear, spec, 1);
  auto pred = fit.predict(x);
  for (int i = 0; i < 30; ++i) CHECK(pred[i] == doctest::Approx(3.25));
}

TEST_CASE("forest: constant response predicts the constant") {
  Eigen::MatrixXd x = gaussian_matrix(40, 3, 10);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(40, -1.5);
  LearnerSpec spec;
  spec.trees = 10;
  auto model = fit_forest(x, y, false, spec, 1);
  auto pred = model.predict(x);
  for (int i = 0; i < 40; ++i) CHECK(pred[i] == doctest::Approx(-1.5));
}

TEST_CASE("forest: single stump without bootstrap predicts the mean") {
  Eigen::MatrixXd x = gaussian_matrix(25, 2, 11);
  Eigen::VectorXd y = gaussian_matrix(25, 1, 12);
  LearnerSpec spec;
  spec.trees = 1;
  spec.min_node_size = 25;
  spec.bootstrap = false;
  auto model = fit_forest(x, y, false, spec, 1);
  auto pred = model.predict(x);
  for (int i = 0; i < 25; ++i) CHECK(pred[i] == doctest::Approx(y.mean()));
}

TEST_CASE("forest: fits a step function well") {
  const int n = 5000;
  Eigen::MatrixXd x = gaussian_matrix(n, 3, 13);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = x(i, 0) > 0 ? 1.0 : 0.0;
  LearnerSpec spec;
  spec.trees = 200;
  auto model = fit_forest(x.topRows(4000), y.head(4000), false, spec, 2);
  Eigen::VectorXd pred = model.predict(x.bottomRows(1000));
  const double mse = (y.tail(1000) - pred).squaredNorm() / 1000;
  CHECK(mse < 0.02);
}

TEST_CASE("forest: deterministic given seed") {
  Eigen::MatrixXd x = gaussian_matrix(200, 3, 14);
  Eigen::VectorXd y = x.col(0) + 0.5 * gaussian_matrix(200, 1, 15);
  LearnerSpec spec;
  spec.trees = 20;
  auto a = fit_forest(x, y, false, spec, 77).predict(x);
  auto b = fit_forest(x, y, false, spec, 77).predict(x);
  CHECK(a == b);
}

TEST_CASE("ensemble weights") {
  const int n = 100;
  Eigen::VectorXd targets = gaussian_matrix(n, 1, 16);
  SUBCASE("exact model gets weight one") {
    Eigen::MatrixXd preds(n, 2);
    preds.col(0) = targets;
    preds.col(1) = targets.array() + 2.0;
    auto w = fit_ensemble_weights(preds, targets);
    CHECK(w.weights[0] == doctest::Approx(1.0));
    CHECK(w.weights[1] == doctest::Approx(0.0));
  }
  SUBCASE("identical columns tie-break to (0.5, 0.5)") {
    Eigen::MatrixXd preds(n, 2);
    preds.col(0) = targets.array() + 1.0;
    preds.col(1) = targets.array() + 1.0;
    auto w = fit_ensemble_weights(preds, targets);
    CHECK(w.weights[0] == doctest::Approx(0.5));
    CHECK(w.weights[1] == doctest::Approx(0.5));
  }
  SUBCASE("symmetric errors average out") {
    Eigen::MatrixXd preds(n, 2);
    preds.col(0) = targets.array() + 1.0;
    preds.col(1) = targets.array() - 1.0;
    auto w = fit_ensemble_weights(preds, targets);
    CHECK(w.weights[0] == doctest::Approx(0.5));
    Eigen::VectorXd combo = preds * w.weights;
    CHECK((combo - targets).squaredNorm() / n == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("simplex constraint for three models") {
    Eigen::MatrixXd preds(n, 3);
    preds.col(0) = targets.array() * 0.9;
    preds.col(1) = targets.array() + 0.5;
    preds.col(2) = gaussian_matrix(n, 1, 17);
    auto w = fit_ensemble_weights(preds, targets);
    CHECK(w.weights.sum() == doctest::Approx(1.0));
    for (int j = 0; j < 3; ++j) CHECK(w.weights[j] >= -1e-12);
  }
}

TEST_CASE("ensemble holdout MSE never exceeds the best base learner") {
  const int n = 200;
  Eigen::VectorXd targets = gaussian_matrix(n, 1, 18);
  Eigen::MatrixXd preds(n, 2);
  preds.col(0) = targets.array() * 0.8 + 0.3;
  preds.col(1) = targets + 0.7 * gaussian_matrix(n, 1, 19);
  auto w = fit_ensemble_weights(preds, targets);
  const double ens = (preds * w.weights - targets).squaredNorm() / n;
  const double a = (preds.col(0) - targets).squaredNorm() / n;
  const double b = (preds.col(1) - targets).squaredNorm() / n;
  CHECK(ens <= std::min(a, b) + 1e-12);
}
