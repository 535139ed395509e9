#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "linkpred/metrics.hpp"
#include "linkpred/snapshot.hpp"

namespace linkpred {

// Disjoint page partition: 25% test, 25% dev, 50% core-train. Tuning
// scores on dev; the final model refits on core-train + dev.
struct SplitPlan {
  std::vector<int> test;
  std::vector<int> dev;
  std::vector<int> core_train;
  std::uint64_t seed = 0;

  std::vector<int> full_train() const;  // core_train + dev
};

SplitPlan make_split(int n_pages, std::uint64_t seed);

enum class BaselineKind { NNLAv, NNLPr, CCR };

const char* to_string(BaselineKind kind);

// One-feature baseline scores per page for predicting interval
// `target_interval`:
//   NNL-Av  mean scoped new-outlink count over the past intervals,
//   NNL-Pr  scoped count in the previous interval,
//   CCR     fraction of past intervals with a content change.
// `include_target_interval` extends the window through the target interval
// (fidelity experiments only; the default is causal).
Eigen::VectorXd baseline_scores(const CrawlSeries& series,
                                const NewOutlinkCounts& counts, LinkScope scope,
                                BaselineKind kind, int target_interval,
                                bool include_target_interval = false);

// A scored page ordering under a Table-5-style method tag (e.g. "NNL-ET",
// "LCR-ET_LBLA", "NNL-Av"). Pages are sorted by non-increasing score.
struct RankingResult {
  std::string method;
  std::vector<int> pages;
  Eigen::VectorXd scores;  // aligned with `pages`, non-increasing
};

// Orders `subset` by the per-page scores (scores indexed by page id).
RankingResult make_ranking(const std::string& method, const Eigen::VectorXd& scores,
                           const std::vector<int>& subset);

struct NamedTarget {
  std::string name;
  Eigen::VectorXd values;  // aligned with the canonical page list
};

struct RankingEvaluation {
  std::string method;
  std::string target;
  double rho = 0.0;
  PrecisionAtKCurve curve;
};

// Spearman matrix + Precision@k% of every ranking against every target.
// `pages` is the canonical page list the target values are aligned with;
// every ranking must cover exactly that page set.
std::vector<RankingEvaluation> evaluate_rankings(
    const std::vector<RankingResult>& results, const std::vector<int>& pages,
    const std::vector<NamedTarget>& targets, int n_realizations = 5,
    std::uint64_t seed = 0);

}  // namespace linkpred
