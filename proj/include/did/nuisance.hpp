#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "did/common.hpp"

namespace did {

// Design matrix plus standardization metadata (filled by standardize()).
struct FeatureMatrix {
  Eigen::MatrixXd values;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  int n() const { return static_cast<int>(values.rows()); }
  int q() const { return static_cast<int>(values.cols()); }
  void standardize();
};

// Polynomial powers of each column plus optional pairwise interactions.
// Column order: originals, powers by (column, degree), interactions (i<j).
Eigen::MatrixXd expand_features(const Eigen::MatrixXd& x, int max_degree,
                                bool interactions, int column_cap = 10000);

double clip_probability(double p, double eps);

enum class LearnerFamily {
  Logistic,
  LassoLinear,
  LassoLogistic,
  ForestRegression,
  ForestClassification,
  Ensemble,
};

struct LearnerSpec {
  LearnerFamily family = LearnerFamily::Logistic;

  // logistic (Newton with step-halving)
  int logit_max_iter = 100;
  double logit_ridge = 1e-8;

  // lasso path + cross-validation
  int n_lambda = 100;
  double lambda_min_ratio = 1e-3;
  int cv_folds = 10;
  double lambda_override = -1.0;  // >= 0 skips CV and uses this value
  bool lambda_at_max = false;     // force the intercept-only end of the path

  // random forest
  int trees = 500;
  int min_node_size = -1;  // -1: 5 for regression, 1 for classification
  int mtry = -1;           // -1: ceil(q/3) regression, ceil(sqrt(q)) classification
  bool bootstrap = true;

  // feature expansion (applied to lasso families only)
  bool expand = false;
  int expand_degree = 4;
  bool expand_interactions = true;
  int expand_cap = 10000;

  // ensemble (lasso + forest, weights from an internal split)
  int ensemble_folds = 2;

  void validate() const;
};

LearnerSpec learner_spec_from_name(const std::string& name);

class RegressionModel {
 public:
  virtual ~RegressionModel() = default;
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& x) const = 0;
};

class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;
  // raw probabilities; callers clip
  virtual Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const = 0;
};

std::shared_ptr<RegressionModel> fit_regression(const LearnerSpec& spec,
                                                const Eigen::MatrixXd& x,
                                                const Eigen::VectorXd& y,
                                                std::uint64_t seed);
std::shared_ptr<ProbabilityModel> fit_probability(const LearnerSpec& spec,
                                                  const Eigen::MatrixXd& x,
                                                  const Eigen::VectorXi& labels,
                                                  std::uint64_t seed);

// ---- concrete fits, exposed for direct use in tests ----

struct LogisticFit {
  double intercept = 0.0;
  Eigen::VectorXd coef;
  int iterations = 0;

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const;
};

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                         int max_iter = 100, double ridge = 1e-8);

enum class LassoFamily { Linear, Logistic };

struct LassoFit {
  LassoFamily family = LassoFamily::Linear;
  double intercept = 0.0;
  Eigen::VectorXd coef;  // original scale; linear part only when expanded
  double lambda = 0.0;
  Eigen::VectorXd lambda_path;
  Eigen::VectorXd cv_loss;  // mean CV loss per path entry (empty if no CV)

  // set when the fit used feature expansion; predict() re-expands inputs
  Eigen::VectorXd expanded_coef;
  int expand_degree = 1;
  bool expand_interactions = false;
  int expand_cap = 10000;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;        // linear scale
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const;  // logistic
};

LassoFit fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   LassoFamily family, const LearnerSpec& spec,
                   std::uint64_t seed);

struct ForestModel {
  struct Node {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<std::vector<Node>> trees;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       bool classification, const LearnerSpec& spec,
                       std::uint64_t seed);

struct EnsembleWeights {
  Eigen::VectorXd weights;  // nonnegative, sums to 1
};

// Minimizes holdout MSE of the weighted prediction over the simplex.
EnsembleWeights fit_ensemble_weights(const Eigen::MatrixXd& holdout_predictions,
                                     const Eigen::VectorXd& holdout_targets);

}  // namespace did
