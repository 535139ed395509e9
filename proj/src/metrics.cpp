#include "linkpred/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "linkpred/errors.hpp"
#include "linkpred/rng.hpp"

namespace linkpred {

RegressionScores regression_scores(const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size() || y.size() == 0) {
    throw invalid_argument_error("score inputs must be equal non-empty lengths");
  }
  RegressionScores s;
  const Eigen::ArrayXd err = (y - yhat).array();
  s.mae = err.abs().mean();

  std::vector<double> abs_err(err.size());
  for (int i = 0; i < err.size(); ++i) abs_err[static_cast<std::size_t>(i)] = std::abs(err(i));
  const std::size_t mid = abs_err.size() / 2;
  std::nth_element(abs_err.begin(), abs_err.begin() + mid, abs_err.end());
  if (abs_err.size() % 2 == 1) {
    s.medae = abs_err[mid];
  } else {
    const double upper = abs_err[mid];
    const double lower = *std::max_element(abs_err.begin(), abs_err.begin() + mid);
    s.medae = 0.5 * (lower + upper);
  }

  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  if (sst == 0.0) {
    s.r2 = std::numeric_limits<double>::quiet_NaN();
    s.r2_defined = false;
  } else {
    s.r2 = 1.0 - err.square().sum() / sst;
  }
  return s;
}

ClassificationScores classification_scores(const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size() || y.size() == 0) {
    throw invalid_argument_error("score inputs must be equal non-empty lengths");
  }
  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (int i = 0; i < y.size(); ++i) {
    const bool truth = y(i) != 0.0;
    const bool pred = yhat(i) != 0.0;
    if (truth && pred) ++tp;
    else if (!truth && pred) ++fp;
    else if (truth && !pred) ++fn;
    else ++tn;
  }
  ClassificationScores s;
  if (tp + fp == 0) {
    s.precision = std::numeric_limits<double>::quiet_NaN();
    s.precision_defined = false;
  } else {
    s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  s.recall = (tp + fn == 0) ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = (!s.precision_defined || s.precision + s.recall == 0.0)
             ? 0.0
             : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  const double recall_neg =
      (tn + fp == 0) ? 0.0 : static_cast<double>(tn) / static_cast<double>(tn + fp);
  s.balanced_accuracy = 0.5 * (s.recall + recall_neg);
  return s;
}

Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return v(a) < v(b); });

  Eigen::VectorXd ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v(order[static_cast<std::size_t>(j + 1)]) ==
                            v(order[static_cast<std::size_t>(i)])) {
      ++j;
    }
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (int k = i; k <= j; ++k) ranks(order[static_cast<std::size_t>(k)]) = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw invalid_argument_error("spearman needs two equal-length vectors, n >= 2");
  }
  const Eigen::VectorXd ra = average_ranks(a);
  const Eigen::VectorXd rb = average_ranks(b);
  const Eigen::ArrayXd da = ra.array() - ra.mean();
  const Eigen::ArrayXd db = rb.array() - rb.mean();
  const double denom = std::sqrt(da.square().sum() * db.square().sum());
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (da * db).sum() / denom;
}

PrecisionAtKCurve precision_at_k_curve(const Eigen::VectorXd& truth_scores,
                                       const Eigen::VectorXd& predicted_scores,
                                       int n_realizations, std::uint64_t seed) {
  if (truth_scores.size() != predicted_scores.size() || truth_scores.size() == 0) {
    throw invalid_argument_error("rankings must have equal non-empty lengths");
  }
  if (n_realizations < 1) throw invalid_argument_error("need >= 1 realization");
  const int n = static_cast<int>(truth_scores.size());

  PrecisionAtKCurve out;
  out.precision = Eigen::VectorXd::Zero(100);

  std::vector<int> truth_order(static_cast<std::size_t>(n));
  std::vector<int> pred_order(static_cast<std::size_t>(n));
  for (int r = 0; r < n_realizations; ++r) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(r)));
    const std::vector<int> tie_truth = rng.permutation(n);
    const std::vector<int> tie_pred = rng.permutation(n);
    std::iota(truth_order.begin(), truth_order.end(), 0);
    std::iota(pred_order.begin(), pred_order.end(), 0);
    std::sort(truth_order.begin(), truth_order.end(), [&](int a, int b) {
      const double sa = truth_scores(a), sb = truth_scores(b);
      return sa != sb ? sa > sb
                      : tie_truth[static_cast<std::size_t>(a)] <
                            tie_truth[static_cast<std::size_t>(b)];
    });
    std::sort(pred_order.begin(), pred_order.end(), [&](int a, int b) {
      const double sa = predicted_scores(a), sb = predicted_scores(b);
      return sa != sb ? sa > sb
                      : tie_pred[static_cast<std::size_t>(a)] <
                            tie_pred[static_cast<std::size_t>(b)];
    });
    std::vector<int> pred_pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      pred_pos[static_cast<std::size_t>(pred_order[static_cast<std::size_t>(i)])] = i;
    }
    for (int k = 1; k <= 100; ++k) {
      const int top = (n * k + 99) / 100;
      int hits = 0;
      for (int i = 0; i < top; ++i) {
        if (pred_pos[static_cast<std::size_t>(
                truth_order[static_cast<std::size_t>(i)])] < top) {
          ++hits;
        }
      }
      out.precision(k - 1) += static_cast<double>(hits) / static_cast<double>(top);
    }
  }
  out.precision /= static_cast<double>(n_realizations);

  // trapezoid over k in [0.01, 1], extended flat to 0
  double area = 0.01 * out.precision(0);
  for (int k = 1; k < 100; ++k) {
    area += 0.01 * 0.5 * (out.precision(k - 1) + out.precision(k));
  }
  out.area = area;
  return out;
}

}  // namespace linkpred
