#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "linkpred/rng.hpp"

namespace linkpred {

// Binary decision tree stored as a flat node array; node 0 is the root.
// feature < 0 marks a leaf. Split rule: x[feature] <= threshold -> left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf payload (mean target / weighted class-1 share)
};

struct Tree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double predict_row(const Row& x) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
      const TreeNode& n = nodes[static_cast<std::size_t>(node)];
      node = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (int i = 0; i < x.rows(); ++i) out(i) = predict_row(x.row(i));
    return out;
  }
};

// --- extremely randomized trees -------------------------------------------

struct ExtraTreeParams {
  int min_samples_leaf = 2;
  int max_features = 1;  // candidate features per node
  bool classification = false;
};

// One extra-tree over the full sample: at each node one uniform random
// threshold per candidate feature, the best candidate by variance reduction
// (regression) or weighted Gini (classification) wins. `weights` are the
// per-row sample weights (class balancing).
Tree grow_extra_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& weights, const ExtraTreeParams& params,
                     Rng& rng);

// --- histogram trees for boosting -----------------------------------------

// Quantile binning of feature columns into at most max_bins bins per
// feature. split_values[f] holds the ascending upper edges; bin b covers
// (edge[b-1], edge[b]].
struct BinnedMatrix {
  std::vector<std::vector<double>> split_values;
  std::vector<std::vector<std::uint16_t>> codes;  // per feature, per row
  int n_rows = 0;

  int n_features() const { return static_cast<int>(split_values.size()); }
};

BinnedMatrix bin_features(const Eigen::MatrixXd& x, int max_bins = 255);

struct HistTreeParams {
  int min_samples_leaf = 10;
  int max_depth = 0;       // 0 = unbounded
  double min_gain = 1e-12;
};

// Second-order boosting tree: fits leaf values sum(g)/sum(h) over the
// binned features, greedy best-gain splits. When `train_predictions` is
// given it receives the per-row leaf values (cheaper than re-predicting).
Tree grow_hist_tree(const BinnedMatrix& binned, const Eigen::VectorXd& grad,
                    const Eigen::VectorXd& hess, const HistTreeParams& params,
                    Eigen::VectorXd* train_predictions = nullptr);

}  // namespace linkpred
