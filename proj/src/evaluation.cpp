#include "linkpred/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "linkpred/errors.hpp"
#include "linkpred/rng.hpp"

namespace linkpred {

std::vector<int> SplitPlan::full_train() const {
  std::vector<int> all = core_train;
  all.insert(all.end(), dev.begin(), dev.end());
  return all;
}

SplitPlan make_split(int n_pages, std::uint64_t seed) {
  if (n_pages < 8) throw invalid_argument_error("need at least 8 pages to split");
  std::vector<int> order(static_cast<std::size_t>(n_pages));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(split_seed(seed, 17));
  rng.shuffle(order);

  SplitPlan plan;
  plan.seed = seed;
  const int n_test = n_pages / 4;
  const int n_dev = n_pages / 4;
  plan.test.assign(order.begin(), order.begin() + n_test);
  plan.dev.assign(order.begin() + n_test, order.begin() + n_test + n_dev);
  plan.core_train.assign(order.begin() + n_test + n_dev, order.end());
  std::sort(plan.test.begin(), plan.test.end());
  std::sort(plan.dev.begin(), plan.dev.end());
  std::sort(plan.core_train.begin(), plan.core_train.end());
  return plan;
}

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::NNLAv: return "NNL-Av";
    case BaselineKind::NNLPr: return "NNL-Pr";
    case BaselineKind::CCR: return "CCR";
  }
  return "?";
}

Eigen::VectorXd baseline_scores(const CrawlSeries& series,
                                const NewOutlinkCounts& counts, LinkScope scope,
                                BaselineKind kind, int target_interval,
                                bool include_target_interval) {
  const int t = target_interval;
  if (t < 0 || t >= series.interval_count()) {
    throw invalid_argument_error("target interval out of range");
  }
  const int last = include_target_interval ? t : t - 1;  // inclusive window end
  const int window = last + 1;
  const int m = series.n_pages();

  switch (kind) {
    case BaselineKind::NNLPr: {
      if (t < 1) throw invalid_argument_error("NNL-Pr needs one past interval");
      return counts.scoped(scope).row(t - 1).transpose();
    }
    case BaselineKind::NNLAv: {
      if (window < 2) {
        throw invalid_argument_error("NNL-Av needs at least two past intervals");
      }
      return counts.scoped(scope).topRows(window).colwise().mean().transpose();
    }
    case BaselineKind::CCR: {
      if (window < 1) throw invalid_argument_error("CCR needs one past interval");
      const Eigen::MatrixXd flags = content_change_flags(series);
      Eigen::VectorXd ccr(m);
      for (int p = 0; p < m; ++p) {
        ccr(p) = flags.col(p).head(window).mean();
      }
      return ccr;
    }
  }
  throw invalid_argument_error("unknown baseline kind");
}

RankingResult make_ranking(const std::string& method, const Eigen::VectorXd& scores,
                           const std::vector<int>& subset) {
  RankingResult result;
  result.method = method;
  result.pages = subset;
  std::stable_sort(result.pages.begin(), result.pages.end(),
                   [&](int a, int b) { return scores(a) > scores(b); });
  result.scores.resize(static_cast<int>(result.pages.size()));
  for (std::size_t i = 0; i < result.pages.size(); ++i) {
    result.scores(static_cast<int>(i)) = scores(result.pages[i]);
  }
  return result;
}

std::vector<RankingEvaluation> evaluate_rankings(
    const std::vector<RankingResult>& results, const std::vector<int>& pages,
    const std::vector<NamedTarget>& targets, int n_realizations,
    std::uint64_t seed) {
  const int n = static_cast<int>(pages.size());
  std::unordered_map<int, int> position;
  position.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) position.emplace(pages[static_cast<std::size_t>(i)], i);

  for (const auto& target : targets) {
    if (target.values.size() != n) {
      throw invalid_argument_error("target '" + target.name +
                                   "' does not match the page list");
    }
  }

  std::vector<RankingEvaluation> evaluations;
  for (const auto& result : results) {
    if (static_cast<int>(result.pages.size()) != n) {
      throw invalid_argument_error("ranking '" + result.method +
                                   "' covers a different page set");
    }
    Eigen::VectorXd aligned(n);
    for (std::size_t i = 0; i < result.pages.size(); ++i) {
      const auto it = position.find(result.pages[i]);
      if (it == position.end()) {
        throw invalid_argument_error("ranking '" + result.method +
                                     "' covers a different page set");
      }
      aligned(it->second) = result.scores(static_cast<int>(i));
    }
    for (const auto& target : targets) {
      RankingEvaluation eval;
      eval.method = result.method;
      eval.target = target.name;
      eval.rho = spearman_rho(aligned, target.values);
      eval.curve = precision_at_k_curve(target.values, aligned, n_realizations, seed);
      evaluations.push_back(std::move(eval));
    }
  }
  return evaluations;
}

}  // namespace linkpred
