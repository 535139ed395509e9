#include "linkpred/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "linkpred/errors.hpp"

namespace linkpred {

namespace {

struct ExtraTreeBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& y;
  const Eigen::VectorXd& w;
  const ExtraTreeParams& params;
  Rng& rng;
  std::vector<TreeNode> nodes;
  std::vector<int> feature_scratch;

  int make_leaf(const std::vector<int>& rows) {
    double wsum = 0.0, wy = 0.0;
    for (int r : rows) {
      wsum += w(r);
      wy += w(r) * y(r);
    }
    nodes.push_back({-1, 0.0, -1, -1, wy / wsum});
    return static_cast<int>(nodes.size()) - 1;
  }

  bool is_pure(const std::vector<int>& rows) const {
    const double first = y(rows.front());
    for (int r : rows) {
      if (y(r) != first) return false;
    }
    return true;
  }

  // split quality to maximize; larger is better
  double split_score(const std::vector<int>& rows, int feature, double threshold,
                     int& n_left) const {
    if (params.classification) {
      double wl = 0, wl1 = 0, wr = 0, wr1 = 0;
      n_left = 0;
      for (int r : rows) {
        if (x(r, feature) <= threshold) {
          ++n_left;
          wl += w(r);
          wl1 += w(r) * y(r);
        } else {
          wr += w(r);
          wr1 += w(r) * y(r);
        }
      }
      if (wl == 0.0 || wr == 0.0) return -std::numeric_limits<double>::infinity();
      // minimize total weighted Gini <=> maximize its negative
      const double gini_l = 2.0 * (wl1 / wl) * (1.0 - wl1 / wl);
      const double gini_r = 2.0 * (wr1 / wr) * (1.0 - wr1 / wr);
      return -(wl * gini_l + wr * gini_r);
    }
    double sum_l = 0, sum_r = 0;
    int nl = 0, nr = 0;
    for (int r : rows) {
      if (x(r, feature) <= threshold) {
        sum_l += y(r);
        ++nl;
      } else {
        sum_r += y(r);
        ++nr;
      }
    }
    n_left = nl;
    if (nl == 0 || nr == 0) return -std::numeric_limits<double>::infinity();
    // SSE reduction up to a constant
    return sum_l * sum_l / nl + sum_r * sum_r / nr;
  }

  int build(std::vector<int>& rows) {
    if (static_cast<int>(rows.size()) < 2 * params.min_samples_leaf ||
        is_pure(rows)) {
      return make_leaf(rows);
    }

    // candidate features without replacement
    const int n_features = static_cast<int>(x.cols());
    const int k = std::min(params.max_features, n_features);
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(rng.below(
                            static_cast<std::uint64_t>(n_features - i)));
      std::swap(feature_scratch[static_cast<std::size_t>(i)],
                feature_scratch[static_cast<std::size_t>(j)]);
    }

    int best_feature = -1, best_left = 0;
    double best_threshold = 0.0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      const int f = feature_scratch[static_cast<std::size_t>(i)];
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (int r : rows) {
        lo = std::min(lo, x(r, f));
        hi = std::max(hi, x(r, f));
      }
      if (lo == hi) continue;
      const double threshold = rng.uniform(lo, hi);
      int n_left = 0;
      const double score = split_score(rows, f, threshold, n_left);
      if (n_left < params.min_samples_leaf ||
          static_cast<int>(rows.size()) - n_left < params.min_samples_leaf) {
        continue;
      }
      if (score > best_score) {
        best_score = score;
        best_feature = f;
        best_threshold = threshold;
        best_left = n_left;
      }
    }
    if (best_feature < 0) return make_leaf(rows);

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(static_cast<std::size_t>(best_left));
    right_rows.reserve(rows.size() - static_cast<std::size_t>(best_left));
    for (int r : rows) {
      (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int self = static_cast<int>(nodes.size());
    nodes.push_back({best_feature, best_threshold, -1, -1, 0.0});
    const int left = build(left_rows);
    const int right = build(right_rows);
    nodes[static_cast<std::size_t>(self)].left = left;
    nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }
};

}  // namespace

Tree grow_extra_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& weights, const ExtraTreeParams& params,
                     Rng& rng) {
  if (x.rows() == 0 || x.rows() != y.size() || y.size() != weights.size()) {
    throw invalid_argument_error("inconsistent training data shapes");
  }
  ExtraTreeBuilder builder{x, y, weights, params, rng, {}, {}};
  builder.feature_scratch.resize(static_cast<std::size_t>(x.cols()));
  std::iota(builder.feature_scratch.begin(), builder.feature_scratch.end(), 0);
  std::vector<int> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  builder.build(rows);
  Tree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

BinnedMatrix bin_features(const Eigen::MatrixXd& x, int max_bins) {
  if (max_bins < 2 || max_bins > 255) {
    throw invalid_argument_error("max_bins must be in [2, 255]");
  }
  const int n = static_cast<int>(x.rows());
  const int f = static_cast<int>(x.cols());
  BinnedMatrix binned;
  binned.n_rows = n;
  binned.split_values.resize(static_cast<std::size_t>(f));
  binned.codes.resize(static_cast<std::size_t>(f));

  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (int j = 0; j < f; ++j) {
    for (int i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = x(i, j);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct(sorted);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    auto& edges = binned.split_values[static_cast<std::size_t>(j)];
    if (static_cast<int>(distinct.size()) <= max_bins) {
      for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        edges.push_back(0.5 * (distinct[i] + distinct[i + 1]));
      }
    } else {
      for (int b = 1; b < max_bins; ++b) {
        const std::size_t rank = static_cast<std::size_t>(
            static_cast<long long>(b) * n / max_bins);
        edges.push_back(sorted[rank]);
      }
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }

    auto& codes = binned.codes[static_cast<std::size_t>(j)];
    codes.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      codes[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(
          std::lower_bound(edges.begin(), edges.end(), x(i, j)) - edges.begin());
    }
  }
  return binned;
}

namespace {

struct HistBuilder {
  const BinnedMatrix& binned;
  const Eigen::VectorXd& g;
  const Eigen::VectorXd& h;
  const HistTreeParams& params;
  std::vector<TreeNode> nodes;
  Eigen::VectorXd* out_pred = nullptr;
  std::vector<int> row_index;

  static constexpr double kEps = 1e-12;

  int make_leaf(int begin, int end) {
    double gs = 0.0, hs = 0.0;
    for (int i = begin; i < end; ++i) {
      const int r = row_index[static_cast<std::size_t>(i)];
      gs += g(r);
      hs += h(r);
    }
    const double value = gs / (hs + kEps);
    if (out_pred) {
      for (int i = begin; i < end; ++i) {
        (*out_pred)(row_index[static_cast<std::size_t>(i)]) = value;
      }
    }
    nodes.push_back({-1, 0.0, -1, -1, value});
    return static_cast<int>(nodes.size()) - 1;
  }

  int build(int begin, int end, int depth) {
    const int count = end - begin;
    if (count < 2 * params.min_samples_leaf ||
        (params.max_depth > 0 && depth >= params.max_depth)) {
      return make_leaf(begin, end);
    }

    double g_total = 0.0, h_total = 0.0;
    for (int i = begin; i < end; ++i) {
      const int r = row_index[static_cast<std::size_t>(i)];
      g_total += g(r);
      h_total += h(r);
    }
    const double parent_score = g_total * g_total / (h_total + kEps);

    int best_feature = -1, best_bin = -1;
    double best_gain = params.min_gain;
    std::vector<double> bin_g, bin_h;
    std::vector<int> bin_c;
    for (int f = 0; f < binned.n_features(); ++f) {
      const auto& edges = binned.split_values[static_cast<std::size_t>(f)];
      if (edges.empty()) continue;
      const int n_bins = static_cast<int>(edges.size()) + 1;
      bin_g.assign(static_cast<std::size_t>(n_bins), 0.0);
      bin_h.assign(static_cast<std::size_t>(n_bins), 0.0);
      bin_c.assign(static_cast<std::size_t>(n_bins), 0);
      const auto& codes = binned.codes[static_cast<std::size_t>(f)];
      for (int i = begin; i < end; ++i) {
        const int r = row_index[static_cast<std::size_t>(i)];
        const int b = codes[static_cast<std::size_t>(r)];
        bin_g[static_cast<std::size_t>(b)] += g(r);
        bin_h[static_cast<std::size_t>(b)] += h(r);
        ++bin_c[static_cast<std::size_t>(b)];
      }
      double gl = 0.0, hl = 0.0;
      int cl = 0;
      for (int b = 0; b + 1 < n_bins; ++b) {
        gl += bin_g[static_cast<std::size_t>(b)];
        hl += bin_h[static_cast<std::size_t>(b)];
        cl += bin_c[static_cast<std::size_t>(b)];
        if (cl < params.min_samples_leaf) continue;
        if (count - cl < params.min_samples_leaf) break;
        const double gr = g_total - gl;
        const double hr = h_total - hl;
        const double gain = gl * gl / (hl + kEps) + gr * gr / (hr + kEps) -
                            parent_score;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_bin = b;
        }
      }
    }
    if (best_feature < 0) return make_leaf(begin, end);

    const auto& codes = binned.codes[static_cast<std::size_t>(best_feature)];
    const auto mid = std::stable_partition(
        row_index.begin() + begin, row_index.begin() + end, [&](int r) {
          return codes[static_cast<std::size_t>(r)] <= best_bin;
        });
    const int split = static_cast<int>(mid - row_index.begin());

    const int self = static_cast<int>(nodes.size());
    nodes.push_back(
        {best_feature,
         binned.split_values[static_cast<std::size_t>(best_feature)]
                            [static_cast<std::size_t>(best_bin)],
         -1, -1, 0.0});
    const int left = build(begin, split, depth + 1);
    const int right = build(split, end, depth + 1);
    nodes[static_cast<std::size_t>(self)].left = left;
    nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }
};

}  // namespace

Tree grow_hist_tree(const BinnedMatrix& binned, const Eigen::VectorXd& grad,
                    const Eigen::VectorXd& hess, const HistTreeParams& params,
                    Eigen::VectorXd* train_predictions) {
  if (grad.size() != binned.n_rows || hess.size() != binned.n_rows) {
    throw invalid_argument_error("gradient length does not match binned data");
  }
  HistBuilder builder{binned, grad, hess, params, {}, train_predictions, {}};
  builder.row_index.resize(static_cast<std::size_t>(binned.n_rows));
  std::iota(builder.row_index.begin(), builder.row_index.end(), 0);
  builder.build(0, binned.n_rows, 0);
  Tree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

}  // namespace linkpred
