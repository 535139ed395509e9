#pragma once

#include <optional>
#include <string>
#include <vector>

#include "linkpred/evaluation.hpp"
#include "linkpred/features.hpp"
#include "linkpred/learners.hpp"
#include "linkpred/synthetic.hpp"

namespace linkpred {

inline constexpr const char* kToolVersion = "0.1.0";

enum class LearnerFamily { ExtraTrees, HistGB, NGBoost };

const char* to_string(LearnerFamily family);
LearnerFamily learner_family_from_string(const std::string& s);

// One reproducible experiment: data -> features -> split/tune/fit ->
// rankings and metrics. Serializable; rerunning an archived config with
// the same seeds reproduces the outputs.
struct ExperimentConfig {
  std::vector<std::string> input_files;        // one per crawl, ordered
  std::optional<GeneratorConfig> generator;    // used when input_files empty

  TargetKind target = TargetKind::NNL;
  LinkScope scope = LinkScope::Internal;
  FeatureSpec features;
  bool lbla = false;           // train on the LBLA subset
  LearnerFamily learner = LearnerFamily::ExtraTrees;
  HyperParams params;
  ParamGrid grid;
  bool tune_params = false;

  int repetitions = 3;
  int related_k = 30;
  int related_crawl = 0;          // earliest crawl by default
  int target_interval = -1;       // -1 = last interval
  int n_realizations = 5;
  bool include_baselines = true;
  bool baselines_include_target_interval = false;
  bool require_semantic = true;
  std::uint64_t seed = 1;
  int threads = 0;
};

std::string experiment_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_from_json(const std::string& text);
std::string generator_to_json(const GeneratorConfig& config);
GeneratorConfig generator_from_json(const std::string& text);

// SHA-256 of the canonical config serialization, embedded in every output.
std::string config_hash(const ExperimentConfig& config);

// Header lines ("# key value") carrying tool version, config hash and seed.
std::string output_header(const std::string& hash, std::uint64_t seed);

struct RepetitionResult {
  int repetition = 0;
  HyperParams tuned;
  bool classification = false;
  RegressionScores regression;        // regression-style fits
  ClassificationScores classifier;    // classifiers
  std::vector<RankingEvaluation> rankings;
};

struct ExperimentResult {
  std::vector<RepetitionResult> repetitions;
  EnsembleModel model;                     // final fit of the last repetition
  std::vector<RankingResult> last_rankings;  // test-set rankings, last repetition
  std::vector<std::string> urls;             // page id -> url
};

// Loads (or generates) the series for a config.
std::pair<CrawlSeries, std::optional<GroundTruth>> load_experiment_data(
    const ExperimentConfig& config);

// Full protocol: per repetition split 25/25/50, tune on dev, refit on the
// whole training side, evaluate on test, rank against the three targets.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const CrawlSeries& series);

// Convenience for tests: rows of `matrix` restricted to `ids`.
Eigen::MatrixXd select_rows(const Eigen::MatrixXd& matrix,
                            const std::vector<int>& ids);
Eigen::VectorXd select_rows(const Eigen::VectorXd& values,
                            const std::vector<int>& ids);

// Writes metric tables, rankings, and the model under `directory`.
void write_experiment_outputs(const ExperimentConfig& config,
                              const ExperimentResult& result,
                              const std::string& directory);

}  // namespace linkpred
