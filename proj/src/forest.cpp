#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "did/nuisance.hpp"

namespace did {

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& y;
  int min_node_size;
  int mtry;
  std::mt19937_64 rng;
  std::vector<ForestModel::Node> nodes;
  std::vector<int> feature_pool;

  TreeBuilder(const Eigen::MatrixXd& x_, const Eigen::VectorXd& y_, int min_node,
              int mtry_, std::uint64_t seed)
      : x(x_), y(y_), min_node_size(min_node), mtry(mtry_), rng(seed) {
    feature_pool.resize(x.cols());
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
  }

  double node_mean(const std::vector<int>& idx) const {
    double s = 0.0;
    for (int i : idx) s += y[i];
    return s / idx.size();
  }

  // best split on one feature by scanning the sorted node sample;
  // returns the proxy gain sum_L^2/n_L + sum_R^2/n_R (larger is better)
  bool best_split_on(int feature, std::vector<int>& idx, double& best_gain,
                     double& best_threshold) const {
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return x(a, feature) < x(b, feature);
    });
    const int m = static_cast<int>(idx.size());
    double total = 0.0;
    for (int i : idx) total += y[i];
    double left_sum = 0.0;
    bool found = false;
    for (int i = 0; i + 1 < m; ++i) {
      left_sum += y[idx[i]];
      const double v = x(idx[i], feature);
      const double nv = x(idx[i + 1], feature);
      if (nv <= v) continue;  // cannot separate equal values
      const int nl = i + 1;
      const int nr = m - nl;
      const double gain =
          left_sum * left_sum / nl + (total - left_sum) * (total - left_sum) / nr;
      if (gain > best_gain + 1e-12) {
        best_gain = gain;
        best_threshold = 0.5 * (v + nv);
        found = true;
      }
    }
    return found;
  }

  int build(std::vector<int> idx) {
    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back({});
    const int m = static_cast<int>(idx.size());
    const double mean = node_mean(idx);
    nodes[node_id].value = mean;
    if (m < 2 || m <= min_node_size) return node_id;

    bool constant = true;
    for (int i : idx)
      if (y[i] != y[idx[0]]) {
        constant = false;
        break;
      }
    if (constant) return node_id;

    // random feature subset without replacement
    std::vector<int> pool = feature_pool;
    const int tries = std::min<int>(mtry, static_cast<int>(pool.size()));
    double total = mean * m;
    const double base_gain = total * total / m;
    double best_gain = base_gain;
    double best_threshold = 0.0;
    int best_feature = -1;
    std::vector<int> scratch;
    for (int k = 0; k < tries; ++k) {
      std::uniform_int_distribution<int> pick(k, static_cast<int>(pool.size()) - 1);
      std::swap(pool[k], pool[pick(rng)]);
      const int feature = pool[k];
      scratch = idx;
      double gain = best_gain;
      double threshold = 0.0;
      if (best_split_on(feature, scratch, gain, threshold)) {
        best_gain = gain;
        best_threshold = threshold;
        best_feature = feature;
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<int> left, right;
    for (int i : idx)
      (x(i, best_feature) <= best_threshold ? left : right).push_back(i);
    if (left.empty() || right.empty()) return node_id;

    nodes[node_id].feature = best_feature;
    nodes[node_id].threshold = best_threshold;
    const int l = build(std::move(left));
    nodes[node_id].left = l;
    const int r = build(std::move(right));
    nodes[node_id].right = r;
    return node_id;
  }
};

double predict_tree(const std::vector<ForestModel::Node>& tree,
                    const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int node = 0;
  while (tree[node].feature >= 0)
    node = row[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                          : tree[node].right;
  return tree[node].value;
}

}  // namespace

ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       bool classification, const LearnerSpec& spec,
                       std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  const int q = static_cast<int>(x.cols());
  if (y.size() != n) fail(ErrorCode::InconsistentDimension, "response length mismatch");
  const int min_node =
      spec.min_node_size >= 0 ? spec.min_node_size : (classification ? 1 : 5);
  if (n < std::max(1, min_node))
    fail(ErrorCode::Usage, "need n >= min_node_size");
  const int mtry =
      spec.mtry > 0 ? spec.mtry
                    : (classification
                           ? static_cast<int>(std::ceil(std::sqrt(double(q))))
                           : static_cast<int>(std::ceil(q / 3.0)));

  ForestModel model;
  model.trees.resize(spec.trees);
  for (int t = 0; t < spec.trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, 0x74726565ULL, t);
    std::vector<int> idx(n);
    if (spec.bootstrap) {
      std::mt19937_64 boot_rng(derive_seed(tree_seed, 0x626f6f74ULL));
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (int i = 0; i < n; ++i) idx[i] = pick(boot_rng);
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    TreeBuilder builder(x, y, min_node, std::max(1, mtry), tree_seed);
    builder.build(std::move(idx));
    model.trees[t] = std::move(builder.nodes);
  }
  return model;
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  for (const auto& tree : trees)
    for (int i = 0; i < x.rows(); ++i) out[i] += predict_tree(tree, x.row(i));
  return out / static_cast<double>(trees.size());
}

}  // namespace did
