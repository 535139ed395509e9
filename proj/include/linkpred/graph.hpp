#pragma once

#include <Eigen/Core>
#include <vector>

#include "linkpred/snapshot.hpp"

namespace linkpred {

struct Edge {
  int target = -1;
  LinkScope scope = LinkScope::Internal;
};

// Directed link graph of one crawl, restricted to in-series pages.
// Outlinks pointing outside the series are counted but not materialized.
struct SnapshotGraph {
  int n_nodes = 0;
  std::vector<std::vector<Edge>> out_edges;  // per source node
  std::vector<int> out_of_series_links;      // per source node

  int n_edges() const {
    int total = 0;
    for (const auto& e : out_edges) total += static_cast<int>(e.size());
    return total;
  }
};

SnapshotGraph build_graph(const CrawlSeries& series, int crawl_index);

// Stationary scores of a random walk with restart. Scores are a probability
// distribution: nonnegative, summing to 1.
struct ScoreVector {
  Eigen::VectorXd scores;
  double damping = 0.85;
  int iterations = 0;
  double residual = 0.0;
};

// Power iteration with dangling mass redistributed to the restart
// distribution; stops when the L1 change drops below tol. Throws
// convergence_error if max_iter is hit first.
ScoreVector pagerank(const SnapshotGraph& graph, double damping = 0.85,
                     double tol = 1e-10, int max_iter = 200);

// Same iteration, restart mass uniform over `trusted` only.
ScoreVector trustrank(const SnapshotGraph& graph, const std::vector<int>& trusted,
                      double damping = 0.85, double tol = 1e-10,
                      int max_iter = 200);

// Per-page in-edge counts split by scope.
std::vector<InlinkCounts> inlink_counts(const SnapshotGraph& graph);

}  // namespace linkpred
