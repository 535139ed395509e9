#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace linkpred {

struct RegressionScores {
  double r2 = 0.0;  // NaN when the target has zero variance
  double mae = 0.0;
  double medae = 0.0;
  bool r2_defined = true;
};

RegressionScores regression_scores(const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& yhat);

struct ClassificationScores {
  double precision = 0.0;  // NaN when nothing was predicted positive
  double recall = 0.0;
  double f1 = 0.0;
  double balanced_accuracy = 0.0;
  bool precision_defined = true;
};

// Binary labels; the positive class is 1 ("1+"). Balanced accuracy is the
// mean of the per-class recalls.
ClassificationScores classification_scores(const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& yhat);

// Average (fractional) ranks, ties share the mean rank.
Eigen::VectorXd average_ranks(const Eigen::VectorXd& v);

// Pearson correlation of the average-rank transforms; NaN for a constant
// input vector.
double spearman_rho(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct PrecisionAtKCurve {
  Eigen::VectorXd precision;  // index i = precision at k=(i+1)%
  double area = 0.0;          // trapezoidal, normalized to [0, 1]
};

// Percentage of the ground-truth top k% recovered in the predicted top k%,
// k = 1..100. Ties in BOTH rankings are broken by independent random
// permutations per realization; the curve is the realization average.
PrecisionAtKCurve precision_at_k_curve(const Eigen::VectorXd& truth_scores,
                                       const Eigen::VectorXd& predicted_scores,
                                       int n_realizations = 5,
                                       std::uint64_t seed = 0);

}  // namespace linkpred
