#include "linkpred/learners.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <thread>

#include "linkpred/errors.hpp"
#include "linkpred/metrics.hpp"

namespace linkpred {

namespace {

using json = nlohmann::ordered_json;

constexpr double kEps = 1e-8;

bool is_classifier(ModelKind kind) {
  return kind == ModelKind::ExtraTreesClassifier ||
         kind == ModelKind::HistGBClassifier;
}

void check_binary_labels(const Eigen::VectorXd& y) {
  for (int i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) {
      throw invalid_argument_error("classification labels must be 0/1");
    }
  }
}

// balancing weights n / (2 n_c); returns {w0, w1}
std::pair<double, double> class_weights(const Eigen::VectorXd& y) {
  const double n1 = y.sum();
  const double n0 = static_cast<double>(y.size()) - n1;
  if (n0 == 0.0 || n1 == 0.0) return {1.0, 1.0};
  const double n = static_cast<double>(y.size());
  return {n / (2.0 * n0), n / (2.0 * n1)};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

int thread_count(int threads) {
  if (threads > 0) return threads;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return hw > 0 ? hw : 1;
}

void check_registry(const EnsembleModel& model,
                    const std::vector<std::string>& feature_names,
                    const Eigen::MatrixXd& x) {
  if (registry_hash(feature_names) != model.feature_hash) {
    throw schema_error("feature registry does not match the trained model");
  }
  if (x.cols() != static_cast<int>(model.feature_names.size())) {
    throw schema_error("feature count does not match the trained model");
  }
}

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ExtraTreesRegressor: return "extra_trees_regressor";
    case ModelKind::ExtraTreesClassifier: return "extra_trees_classifier";
    case ModelKind::HistGBRegressor: return "hist_gb_regressor";
    case ModelKind::HistGBClassifier: return "hist_gb_classifier";
    case ModelKind::NGBoostPoisson: return "ngboost_poisson";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "extra_trees_regressor") return ModelKind::ExtraTreesRegressor;
  if (s == "extra_trees_classifier") return ModelKind::ExtraTreesClassifier;
  if (s == "hist_gb_regressor") return ModelKind::HistGBRegressor;
  if (s == "hist_gb_classifier") return ModelKind::HistGBClassifier;
  if (s == "ngboost_poisson") return ModelKind::NGBoostPoisson;
  throw invalid_argument_error("unknown model kind: " + s);
}

std::uint64_t registry_hash(const std::vector<std::string>& feature_names) {
  // FNV-1a over the names with separators
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& name : feature_names) {
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    h ^= 0x1f;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EnsembleModel fit_extra_trees(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const HyperParams& params, Task task,
                              std::vector<std::string> feature_names,
                              int threads) {
  if (x.rows() != y.size() || x.rows() == 0) {
    throw invalid_argument_error("inconsistent training data shapes");
  }
  if (x.rows() < 2 * params.min_samples_leaf) {
    throw invalid_argument_error("too few rows for min_samples_leaf");
  }
  EnsembleModel model;
  model.kind = task == Task::Classification ? ModelKind::ExtraTreesClassifier
                                            : ModelKind::ExtraTreesRegressor;
  model.params = params;
  model.feature_names = std::move(feature_names);
  model.feature_hash = registry_hash(model.feature_names);

  Eigen::VectorXd weights = Eigen::VectorXd::Ones(x.rows());
  if (task == Task::Classification) {
    check_binary_labels(y);
    const auto [w0, w1] = class_weights(y);
    model.class_weight0 = w0;
    model.class_weight1 = w1;
    for (int i = 0; i < y.size(); ++i) weights(i) = y(i) == 1.0 ? w1 : w0;
  }

  // degenerate target: constant model
  const bool constant = (y.maxCoeff() == y.minCoeff());
  if (constant) {
    std::cerr << "warning: constant target, fitting a constant model\n";
    model.degenerate = true;
    model.init = y(0);
    return model;
  }

  const int n_features = static_cast<int>(x.cols());
  ExtraTreeParams tree_params;
  tree_params.min_samples_leaf = params.min_samples_leaf;
  tree_params.classification = task == Task::Classification;
  if (params.max_features > 0) {
    tree_params.max_features = std::min(params.max_features, n_features);
  } else if (task == Task::Classification) {
    tree_params.max_features =
        std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_features))));
  } else {
    tree_params.max_features = std::max(1, n_features / 3);
  }

  model.trees.resize(static_cast<std::size_t>(params.n_estimators));
  const int workers = thread_count(threads);
  std::atomic<int> next{0};
  auto train = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= params.n_estimators) break;
      Rng rng(split_seed(params.seed, static_cast<std::uint64_t>(t)));
      model.trees[static_cast<std::size_t>(t)] =
          grow_extra_tree(x, y, weights, tree_params, rng);
    }
  };
  if (workers == 1) {
    train();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(train);
    for (auto& th : pool) th.join();
  }
  return model;
}

EnsembleModel fit_hist_gb(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const HyperParams& params, Task task,
                          std::vector<std::string> feature_names) {
  if (x.rows() != y.size() || x.rows() == 0) {
    throw invalid_argument_error("inconsistent training data shapes");
  }
  EnsembleModel model;
  model.kind = task == Task::Classification ? ModelKind::HistGBClassifier
                                            : ModelKind::HistGBRegressor;
  model.params = params;
  model.feature_names = std::move(feature_names);
  model.feature_hash = registry_hash(model.feature_names);

  Eigen::VectorXd weights = Eigen::VectorXd::Ones(x.rows());
  if (task == Task::Classification) {
    check_binary_labels(y);
    const auto [w0, w1] = class_weights(y);
    model.class_weight0 = w0;
    model.class_weight1 = w1;
    for (int i = 0; i < y.size(); ++i) weights(i) = y(i) == 1.0 ? w1 : w0;
  }

  if (y.maxCoeff() == y.minCoeff()) {
    std::cerr << "warning: constant target, fitting a constant model\n";
    model.degenerate = true;
    model.init = task == Task::Classification ? (y(0) == 1.0 ? 30.0 : -30.0) : y(0);
    return model;
  }

  const BinnedMatrix binned = bin_features(x, params.max_bins);
  HistTreeParams tree_params;
  tree_params.min_samples_leaf = params.min_samples_leaf;
  tree_params.max_depth = params.max_depth;

  const int n = static_cast<int>(x.rows());
  Eigen::VectorXd raw(n), grad(n), hess(n), leaf_values(n);
  if (task == Task::Regression) {
    model.init = y.mean();
  } else {
    const double wpos = (y.array() * weights.array()).sum();
    const double wtotal = weights.sum();
    const double p = std::min(1.0 - kEps, std::max(kEps, wpos / wtotal));
    model.init = std::log(p / (1.0 - p));
  }
  raw.setConstant(model.init);

  model.trees.reserve(static_cast<std::size_t>(params.n_estimators));
  model.train_loss.reserve(static_cast<std::size_t>(params.n_estimators));
  for (int stage = 0; stage < params.n_estimators; ++stage) {
    if (task == Task::Regression) {
      grad = y - raw;
      hess.setOnes();
    } else {
      for (int i = 0; i < n; ++i) {
        const double p = sigmoid(raw(i));
        grad(i) = weights(i) * (y(i) - p);
        hess(i) = std::max(weights(i) * p * (1.0 - p), 1e-16);
      }
    }
    Tree tree = grow_hist_tree(binned, grad, hess, tree_params, &leaf_values);
    raw += params.learning_rate * leaf_values;
    model.trees.push_back(std::move(tree));

    double loss = 0.0;
    if (task == Task::Regression) {
      loss = (y - raw).squaredNorm() / n;
    } else {
      for (int i = 0; i < n; ++i) {
        const double p = std::min(1.0 - 1e-15, std::max(1e-15, sigmoid(raw(i))));
        loss -= weights(i) * (y(i) * std::log(p) + (1.0 - y(i)) * std::log(1.0 - p));
      }
      loss /= n;
    }
    model.train_loss.push_back(loss);
  }
  return model;
}

EnsembleModel fit_ngboost_poisson(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y,
                                  const HyperParams& params,
                                  std::vector<std::string> feature_names) {
  if (x.rows() != y.size() || x.rows() == 0) {
    throw invalid_argument_error("inconsistent training data shapes");
  }
  for (int i = 0; i < y.size(); ++i) {
    if (y(i) < 0.0 || y(i) != std::floor(y(i))) {
      throw invalid_argument_error("Poisson targets must be nonnegative integers");
    }
  }
  EnsembleModel model;
  model.kind = ModelKind::NGBoostPoisson;
  model.params = params;
  model.feature_names = std::move(feature_names);
  model.feature_hash = registry_hash(model.feature_names);
  model.init = std::log(y.mean() + kEps);

  if (y.maxCoeff() == 0.0) {
    std::cerr << "warning: all-zero counts, returning the floor model\n";
    model.degenerate = true;
    return model;
  }

  const BinnedMatrix binned = bin_features(x, params.max_bins);
  HistTreeParams tree_params;
  tree_params.min_samples_leaf = params.min_samples_leaf;
  tree_params.max_depth = params.max_depth > 0 ? params.max_depth : 3;

  const int n = static_cast<int>(x.rows());
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(n, model.init);
  Eigen::VectorXd natural_grad(n), leaf_values(n);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  model.trees.reserve(static_cast<std::size_t>(params.n_estimators));
  model.train_loss.reserve(static_cast<std::size_t>(params.n_estimators));
  for (int stage = 0; stage < params.n_estimators; ++stage) {
    for (int i = 0; i < n; ++i) {
      const double mu = std::exp(theta(i));
      // ordinary gradient (mu - y) scaled by the Fisher information mu
      natural_grad(i) = (mu - y(i)) / mu;
    }
    Tree tree = grow_hist_tree(binned, natural_grad, ones, tree_params, &leaf_values);
    theta -= params.learning_rate * leaf_values;
    model.trees.push_back(std::move(tree));

    double nll = 0.0;
    for (int i = 0; i < n; ++i) nll += std::exp(theta(i)) - y(i) * theta(i);
    model.train_loss.push_back(nll / n);
  }
  return model;
}

namespace {

Eigen::VectorXd ensemble_raw(const EnsembleModel& model, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  if (model.degenerate || model.trees.empty()) {
    out.setConstant(model.init);
    return out;
  }
  switch (model.kind) {
    case ModelKind::ExtraTreesRegressor:
    case ModelKind::ExtraTreesClassifier: {
      for (const Tree& tree : model.trees) out += tree.predict(x);
      out /= static_cast<double>(model.trees.size());
      return out;
    }
    case ModelKind::HistGBRegressor:
    case ModelKind::HistGBClassifier: {
      out.setConstant(model.init);
      for (const Tree& tree : model.trees) {
        out += model.params.learning_rate * tree.predict(x);
      }
      return out;
    }
    case ModelKind::NGBoostPoisson: {
      out.setConstant(model.init);
      for (const Tree& tree : model.trees) {
        out -= model.params.learning_rate * tree.predict(x);
      }
      return out;
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd predict_value(const EnsembleModel& model, const Eigen::MatrixXd& x,
                              const std::vector<std::string>& feature_names) {
  check_registry(model, feature_names, x);
  if (x.rows() == 0) return Eigen::VectorXd();
  Eigen::VectorXd raw = ensemble_raw(model, x);
  switch (model.kind) {
    case ModelKind::ExtraTreesRegressor:
    case ModelKind::HistGBRegressor:
      return raw;
    case ModelKind::ExtraTreesClassifier:
      return raw;  // already a weighted class-1 probability average
    case ModelKind::HistGBClassifier:
      return raw.unaryExpr([](double z) { return sigmoid(z); });
    case ModelKind::NGBoostPoisson:
      return raw.unaryExpr([](double z) { return std::exp(z); });
  }
  return raw;
}

Eigen::VectorXd predict_label(const EnsembleModel& model, const Eigen::MatrixXd& x,
                              const std::vector<std::string>& feature_names) {
  if (!is_classifier(model.kind)) {
    throw invalid_argument_error("labels are only defined for classifiers");
  }
  Eigen::VectorXd prob = predict_value(model, x, feature_names);
  return prob.unaryExpr([](double p) { return p >= 0.5 ? 1.0 : 0.0; });
}

Eigen::VectorXd predict_change_probability(const EnsembleModel& model,
                                           const Eigen::MatrixXd& x,
                                           const std::vector<std::string>& feature_names) {
  if (model.kind != ModelKind::NGBoostPoisson) {
    throw invalid_argument_error("change probability needs a Poisson model");
  }
  Eigen::VectorXd mu = predict_value(model, x, feature_names);
  return mu.unaryExpr([](double m) { return 1.0 - std::exp(-m); });
}

namespace {

EnsembleModel fit_for_tuning(ModelKind kind, const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& y, const HyperParams& params,
                             const std::vector<std::string>& names, int threads) {
  switch (kind) {
    case ModelKind::ExtraTreesRegressor:
      return fit_extra_trees(x, y, params, Task::Regression, names, threads);
    case ModelKind::ExtraTreesClassifier:
      return fit_extra_trees(x, y, params, Task::Classification, names, threads);
    case ModelKind::HistGBRegressor:
      return fit_hist_gb(x, y, params, Task::Regression, names);
    case ModelKind::HistGBClassifier:
      return fit_hist_gb(x, y, params, Task::Classification, names);
    case ModelKind::NGBoostPoisson:
      return fit_ngboost_poisson(x, y, params, names);
  }
  throw invalid_argument_error("unknown model kind");
}

}  // namespace

HyperParams tune(ModelKind kind, const ParamGrid& grid, const Eigen::MatrixXd& x_train,
                 const Eigen::VectorXd& y_train, const Eigen::MatrixXd& x_dev,
                 const Eigen::VectorXd& y_dev,
                 const std::vector<std::string>& feature_names,
                 const HyperParams& base, int threads) {
  if (grid.n_estimators.empty() || grid.min_samples_leaf.empty() ||
      grid.learning_rates.empty()) {
    throw invalid_argument_error("empty tuning grid");
  }
  const bool extra_trees = kind == ModelKind::ExtraTreesRegressor ||
                           kind == ModelKind::ExtraTreesClassifier;
  const int leaf_lo = extra_trees ? 2 : 10;
  for (int v : grid.n_estimators) {
    if (v < 200 || v > 500) throw invalid_argument_error("n_estimators outside 200..500");
  }
  for (int v : grid.min_samples_leaf) {
    if (v < leaf_lo || v > 25) {
      throw invalid_argument_error("min_samples_leaf outside the tuning range");
    }
  }
  for (double v : grid.learning_rates) {
    if (v < 0.02 || v > 0.1) throw invalid_argument_error("learning rate outside 0.02..0.1");
  }

  const bool classification = is_classifier(kind);
  HyperParams best = base;
  double best_score = -std::numeric_limits<double>::infinity();
  bool first = true;
  const std::vector<double> rates = extra_trees ? std::vector<double>{base.learning_rate}
                                                : grid.learning_rates;
  for (int leaf : grid.min_samples_leaf) {
    for (int n_est : grid.n_estimators) {
      for (double lr : rates) {
        HyperParams candidate = base;
        candidate.n_estimators = n_est;
        candidate.min_samples_leaf = leaf;
        candidate.learning_rate = lr;
        const EnsembleModel model =
            fit_for_tuning(kind, x_train, y_train, candidate, feature_names, threads);
        double score;
        if (classification) {
          score = classification_scores(y_dev,
                                        predict_label(model, x_dev, feature_names))
                      .balanced_accuracy;
        } else {
          score =
              regression_scores(y_dev, predict_value(model, x_dev, feature_names)).r2;
        }
        const bool better =
            first || score > best_score ||
            (score == best_score &&
             (candidate.n_estimators < best.n_estimators ||
              (candidate.n_estimators == best.n_estimators &&
               candidate.min_samples_leaf > best.min_samples_leaf)));
        if (better) {
          best = candidate;
          best_score = score;
          first = false;
        }
      }
    }
  }
  return best;
}

Eigen::VectorXd permutation_importance(const EnsembleModel& model,
                                       const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& y,
                                       const std::vector<std::string>& feature_names,
                                       ImportanceMetric metric, int n_repeats,
                                       std::uint64_t seed) {
  const bool labels = metric == ImportanceMetric::BalancedAccuracy;
  auto score = [&](const Eigen::MatrixXd& data) {
    const Eigen::VectorXd pred = labels ? predict_label(model, data, feature_names)
                                        : predict_value(model, data, feature_names);
    switch (metric) {
      case ImportanceMetric::R2: return regression_scores(y, pred).r2;
      case ImportanceMetric::BalancedAccuracy:
        return classification_scores(y, pred).balanced_accuracy;
      case ImportanceMetric::Spearman: return spearman_rho(pred, y);
    }
    return 0.0;
  };

  const double baseline = score(x);
  const int n = static_cast<int>(x.rows());
  Eigen::VectorXd importance = Eigen::VectorXd::Zero(x.cols());
  Eigen::MatrixXd shuffled = x;
  for (int f = 0; f < x.cols(); ++f) {
    double drop = 0.0;
    for (int rep = 0; rep < n_repeats; ++rep) {
      Rng rng(split_seed(seed, static_cast<std::uint64_t>(f) * 1000003ULL +
                                   static_cast<std::uint64_t>(rep)));
      const std::vector<int> perm = rng.permutation(n);
      for (int i = 0; i < n; ++i) shuffled(i, f) = x(perm[static_cast<std::size_t>(i)], f);
      drop += baseline - score(shuffled);
    }
    shuffled.col(f) = x.col(f);
    importance(f) = drop / n_repeats;
  }
  return importance;
}

std::string model_to_json(const EnsembleModel& model) {
  json doc;
  doc["format"] = "linkpred-model";
  doc["version"] = 1;
  doc["kind"] = to_string(model.kind);
  doc["params"] = {{"n_estimators", model.params.n_estimators},
                   {"learning_rate", model.params.learning_rate},
                   {"min_samples_leaf", model.params.min_samples_leaf},
                   {"max_features", model.params.max_features},
                   {"max_bins", model.params.max_bins},
                   {"max_depth", model.params.max_depth},
                   {"seed", model.params.seed}};
  doc["feature_names"] = model.feature_names;
  doc["feature_hash"] = model.feature_hash;
  doc["init"] = model.init;
  doc["class_weight0"] = model.class_weight0;
  doc["class_weight1"] = model.class_weight1;
  doc["degenerate"] = model.degenerate;
  json trees = json::array();
  for (const Tree& tree : model.trees) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc.dump();
}

EnsembleModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw schema_error(std::string("bad model file: ") + e.what());
  }
  if (doc.value("format", std::string()) != "linkpred-model" ||
      doc.value("version", 0) != 1) {
    throw schema_error("unsupported model format/version");
  }
  EnsembleModel model;
  model.kind = model_kind_from_string(doc.at("kind").get<std::string>());
  const auto& p = doc.at("params");
  model.params.n_estimators = p.at("n_estimators").get<int>();
  model.params.learning_rate = p.at("learning_rate").get<double>();
  model.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
  model.params.max_features = p.at("max_features").get<int>();
  model.params.max_bins = p.at("max_bins").get<int>();
  model.params.max_depth = p.at("max_depth").get<int>();
  model.params.seed = p.at("seed").get<std::uint64_t>();
  model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  model.feature_hash = doc.at("feature_hash").get<std::uint64_t>();
  model.init = doc.at("init").get<double>();
  model.class_weight0 = doc.at("class_weight0").get<double>();
  model.class_weight1 = doc.at("class_weight1").get<double>();
  model.degenerate = doc.at("degenerate").get<bool>();
  if (model.feature_hash != registry_hash(model.feature_names)) {
    throw schema_error("feature hash does not match the embedded registry");
  }
  for (const auto& tree_doc : doc.at("trees")) {
    Tree tree;
    for (const auto& n : tree_doc) {
      tree.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(),
                            n.at(2).get<int>(), n.at(3).get<int>(),
                            n.at(4).get<double>()});
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

void save_model(const EnsembleModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  out << model_to_json(model) << '\n';
}

EnsembleModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace linkpred
