#include <utility>

#include "did/data_model.hpp"
#include "did/nuisance.hpp"

namespace did {

namespace {

class LogisticModel final : public ProbabilityModel {
 public:
  explicit LogisticModel(LogisticFit fit) : fit_(std::move(fit)) {}
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const override {
    return fit_.predict_proba(x);
  }

 private:
  LogisticFit fit_;
};

class LassoRegressionModel final : public RegressionModel {
 public:
  explicit LassoRegressionModel(LassoFit fit) : fit_(std::move(fit)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    return fit_.predict(x);
  }

 private:
  LassoFit fit_;
};

class LassoProbabilityModel final : public ProbabilityModel {
 public:
  explicit LassoProbabilityModel(LassoFit fit) : fit_(std::move(fit)) {}
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const override {
    return fit_.predict_proba(x);
  }

 private:
  LassoFit fit_;
};

class ForestRegressionModel final : public RegressionModel {
 public:
  explicit ForestRegressionModel(ForestModel model) : model_(std::move(model)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    return model_.predict(x);
  }

 private:
  ForestModel model_;
};

class ForestProbabilityModel final : public ProbabilityModel {
 public:
  explicit ForestProbabilityModel(ForestModel model) : model_(std::move(model)) {}
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const override {
    return model_.predict(x).cwiseMax(0.0).cwiseMin(1.0);
  }

 private:
  ForestModel model_;
};

class EnsembleRegressionModel final : public RegressionModel {
 public:
  EnsembleRegressionModel(std::vector<std::shared_ptr<RegressionModel>> base,
                          Eigen::VectorXd weights)
      : base_(std::move(base)), weights_(std::move(weights)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (size_t m = 0; m < base_.size(); ++m)
      out += weights_[static_cast<int>(m)] * base_[m]->predict(x);
    return out;
  }

 private:
  std::vector<std::shared_ptr<RegressionModel>> base_;
  Eigen::VectorXd weights_;
};

class EnsembleProbabilityModel final : public ProbabilityModel {
 public:
  EnsembleProbabilityModel(std::vector<std::shared_ptr<ProbabilityModel>> base,
                           Eigen::VectorXd weights)
      : base_(std::move(base)), weights_(std::move(weights)) {}
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (size_t m = 0; m < base_.size(); ++m)
      out += weights_[static_cast<int>(m)] * base_[m]->predict_proba(x);
    return out;
  }

 private:
  std::vector<std::shared_ptr<ProbabilityModel>> base_;
  Eigen::VectorXd weights_;
};

LearnerSpec with_family(LearnerSpec spec, LearnerFamily family) {
  spec.family = family;
  return spec;
}

// Out-of-sample predictions on the training rows via an internal split,
// used to pick MSE-optimal ensemble weights.
template <typename FitFn, typename PredictFn>
Eigen::VectorXd cross_predictions(const Eigen::MatrixXd& x, int n, int folds,
                                  std::uint64_t seed, FitFn fit, PredictFn predict) {
  FoldPartition part = partition_folds(n, folds, seed);
  Eigen::VectorXd out(n);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train = part.complement_indices(f);
    std::vector<int> val = part.fold_indices(f);
    auto model = fit(train, derive_seed(seed, 0x656e73ULL, f));
    Eigen::MatrixXd xval(val.size(), x.cols());
    for (size_t i = 0; i < val.size(); ++i) xval.row(i) = x.row(val[i]);
    Eigen::VectorXd pred = predict(model, xval);
    for (size_t i = 0; i < val.size(); ++i) out[val[i]] = pred[i];
  }
  return out;
}

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

}  // namespace

std::shared_ptr<RegressionModel> fit_regression(const LearnerSpec& spec,
                                                const Eigen::MatrixXd& x,
                                                const Eigen::VectorXd& y,
                                                std::uint64_t seed) {
  spec.validate();
  switch (spec.family) {
    case LearnerFamily::LassoLinear:
      return std::make_shared<LassoRegressionModel>(
          fit_lasso(x, y, LassoFamily::Linear, spec, seed));
    case LearnerFamily::ForestRegression:
      return std::make_shared<ForestRegressionModel>(
          fit_forest(x, y, false, spec, seed));
    case LearnerFamily::Ensemble: {
      const int n = static_cast<int>(x.rows());
      const LearnerSpec lasso_spec = with_family(spec, LearnerFamily::LassoLinear);
      const LearnerSpec forest_spec = with_family(spec, LearnerFamily::ForestRegression);
      const std::uint64_t split_seed = derive_seed(seed, 0x686f6c64ULL);
      Eigen::MatrixXd holdout(n, 2);
      holdout.col(0) = cross_predictions(
          x, n, spec.ensemble_folds, split_seed,
          [&](const std::vector<int>& idx, std::uint64_t s) {
            return fit_lasso(subset_rows(x, idx), subset(y, idx),
                             LassoFamily::Linear, lasso_spec, s);
          },
          [](const LassoFit& m, const Eigen::MatrixXd& xv) { return m.predict(xv); });
      holdout.col(1) = cross_predictions(
          x, n, spec.ensemble_folds, split_seed,
          [&](const std::vector<int>& idx, std::uint64_t s) {
            return fit_forest(subset_rows(x, idx), subset(y, idx), false,
                              forest_spec, s);
          },
          [](const ForestModel& m, const Eigen::MatrixXd& xv) {
            return m.predict(xv);
          });
      EnsembleWeights w = fit_ensemble_weights(holdout, y);
      std::vector<std::shared_ptr<RegressionModel>> base;
      base.push_back(fit_regression(lasso_spec, x, y, derive_seed(seed, 1)));
      base.push_back(fit_regression(forest_spec, x, y, derive_seed(seed, 2)));
      return std::make_shared<EnsembleRegressionModel>(std::move(base), w.weights);
    }
    default:
      fail(ErrorCode::Config, "learner family cannot fit a regression");
  }
}

std::shared_ptr<ProbabilityModel> fit_probability(const LearnerSpec& spec,
                                                  const Eigen::MatrixXd& x,
                                                  const Eigen::VectorXi& labels,
                                                  std::uint64_t seed) {
  spec.validate();
  const Eigen::VectorXd y = labels.cast<double>();
  switch (spec.family) {
    case LearnerFamily::Logistic:
      return std::make_shared<LogisticModel>(
          fit_logistic(x, labels, spec.logit_max_iter, spec.logit_ridge));
    case LearnerFamily::LassoLinear:  // treat as its logistic counterpart
    case LearnerFamily::LassoLogistic:
      return std::make_shared<LassoProbabilityModel>(
          fit_lasso(x, y, LassoFamily::Logistic, spec, seed));
    case LearnerFamily::ForestRegression:
    case LearnerFamily::ForestClassification:
      return std::make_shared<ForestProbabilityModel>(
          fit_forest(x, y, true, spec, seed));
    case LearnerFamily::Ensemble: {
      const int n = static_cast<int>(x.rows());
      const LearnerSpec lasso_spec = with_family(spec, LearnerFamily::LassoLogistic);
      const LearnerSpec forest_spec =
          with_family(spec, LearnerFamily::ForestClassification);
      const std::uint64_t split_seed = derive_seed(seed, 0x686f6c64ULL);
      Eigen::MatrixXd holdout(n, 2);
      holdout.col(0) = cross_predictions(
          x, n, spec.ensemble_folds, split_seed,
          [&](const std::vector<int>& idx, std::uint64_t s) {
            return fit_lasso(subset_rows(x, idx), subset(y, idx),
                             LassoFamily::Logistic, lasso_spec, s);
          },
          [](const LassoFit& m, const Eigen::MatrixXd& xv) {
            return m.predict_proba(xv);
          });
      holdout.col(1) = cross_predictions(
          x, n, spec.ensemble_folds, split_seed,
          [&](const std::vector<int>& idx, std::uint64_t s) {
            return fit_forest(subset_rows(x, idx), subset(y, idx), true,
                              forest_spec, s);
          },
          [](const ForestModel& m, const Eigen::MatrixXd& xv) {
            return m.predict(xv).cwiseMax(0.0).cwiseMin(1.0);
          });
      EnsembleWeights w = fit_ensemble_weights(holdout, y);
      std::vector<std::shared_ptr<ProbabilityModel>> base;
      base.push_back(fit_probability(lasso_spec, x, labels, derive_seed(seed, 1)));
      base.push_back(fit_probability(forest_spec, x, labels, derive_seed(seed, 2)));
      return std::make_shared<EnsembleProbabilityModel>(std::move(base), w.weights);
    }
  }
  fail(ErrorCode::Config, "unhandled learner family");
}

}  // namespace did
