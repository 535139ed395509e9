#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "linkpred/trees.hpp"

namespace linkpred {

enum class ModelKind {
  ExtraTreesRegressor,
  ExtraTreesClassifier,
  HistGBRegressor,
  HistGBClassifier,
  NGBoostPoisson,
};

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct HyperParams {
  int n_estimators = 300;
  double learning_rate = 0.1;   // boosters only
  int min_samples_leaf = 10;
  int max_features = 0;         // ExtraT candidates per split; 0 = auto
  int max_bins = 255;           // histogram boosters
  int max_depth = 0;            // 0 = unbounded (NGBoost base trees use 3)
  std::uint64_t seed = 0;
};

// Hash of the feature-name registry; models refuse to predict on a matrix
// with a different registry.
std::uint64_t registry_hash(const std::vector<std::string>& feature_names);

struct EnsembleModel {
  ModelKind kind = ModelKind::ExtraTreesRegressor;
  HyperParams params;
  std::vector<std::string> feature_names;
  std::uint64_t feature_hash = 0;
  std::vector<Tree> trees;
  double init = 0.0;            // boosting offset (log-odds / mean / log-mean)
  double class_weight0 = 1.0;   // classifiers
  double class_weight1 = 1.0;
  bool degenerate = false;      // constant model fallback
  std::vector<double> train_loss;  // per boosting stage
};

enum class Task { Regression, Classification };

// Extremely randomized trees over the full sample (no bootstrap).
// Classification balances classes with weights n/(2 n_c).
EnsembleModel fit_extra_trees(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const HyperParams& params, Task task,
                              std::vector<std::string> feature_names,
                              int threads = 0);

// Histogram gradient boosting: least squares (regression) or weighted
// logistic loss (classification) on quantile-binned features.
EnsembleModel fit_hist_gb(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const HyperParams& params, Task task,
                          std::vector<std::string> feature_names);

// Natural-gradient boosting of a Poisson mean: theta = ln(mu), per-stage
// natural gradient (mu - y)/mu fitted by shallow regression trees.
EnsembleModel fit_ngboost_poisson(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y,
                                  const HyperParams& params,
                                  std::vector<std::string> feature_names);

// Primary score per row: regression value, probability of class 1+, or
// the Poisson mean. Throws schema_error on registry mismatch.
Eigen::VectorXd predict_value(const EnsembleModel& model, const Eigen::MatrixXd& x,
                              const std::vector<std::string>& feature_names);

// Argmax class labels (classifiers only).
Eigen::VectorXd predict_label(const EnsembleModel& model, const Eigen::MatrixXd& x,
                              const std::vector<std::string>& feature_names);

// 1 - exp(-mu) per row (NGBoostPoisson only).
Eigen::VectorXd predict_change_probability(const EnsembleModel& model,
                                           const Eigen::MatrixXd& x,
                                           const std::vector<std::string>& feature_names);

// --- tuning ---------------------------------------------------------------

struct ParamGrid {
  std::vector<int> n_estimators = {200, 500};
  std::vector<double> learning_rates = {0.1};      // ignored by ExtraT
  std::vector<int> min_samples_leaf = {10, 25};
};

// Grid search on (train) -> score(dev); balanced accuracy for classifiers,
// R^2 otherwise. Ties prefer fewer estimators, then larger leaves. The grid
// must stay inside the documented tuning ranges.
HyperParams tune(ModelKind kind, const ParamGrid& grid, const Eigen::MatrixXd& x_train,
                 const Eigen::VectorXd& y_train, const Eigen::MatrixXd& x_dev,
                 const Eigen::VectorXd& y_dev,
                 const std::vector<std::string>& feature_names,
                 const HyperParams& base, int threads = 0);

// --- permutation importance -------------------------------------------------

enum class ImportanceMetric { R2, BalancedAccuracy, Spearman };

// Baseline score minus the mean score over n_repeats shuffles of one
// column, all other columns intact.
Eigen::VectorXd permutation_importance(const EnsembleModel& model,
                                       const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& y,
                                       const std::vector<std::string>& feature_names,
                                       ImportanceMetric metric, int n_repeats = 5,
                                       std::uint64_t seed = 0);

// --- serialization -----------------------------------------------------------

// Versioned JSON with the feature registry embedded; round-trips are
// prediction-identical and byte-deterministic.
std::string model_to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const std::string& text);
void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

}  // namespace linkpred
