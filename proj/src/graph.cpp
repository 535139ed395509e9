#include "linkpred/graph.hpp"

#include <string>
#include <unordered_map>

#include "linkpred/errors.hpp"

namespace linkpred {

SnapshotGraph build_graph(const CrawlSeries& series, int crawl_index) {
  if (crawl_index < 0 || crawl_index >= series.n_crawls()) {
    throw invalid_argument_error("crawl index out of range");
  }
  const int m = series.n_pages();
  std::unordered_map<std::string, int> by_url;
  by_url.reserve(static_cast<std::size_t>(m));
  for (const auto& page : series.pages()) by_url.emplace(page.url, page.id);

  SnapshotGraph graph;
  graph.n_nodes = m;
  graph.out_edges.resize(static_cast<std::size_t>(m));
  graph.out_of_series_links.assign(static_cast<std::size_t>(m), 0);
  for (int p = 0; p < m; ++p) {
    const auto& snap = series.snapshot(crawl_index, p);
    const std::string& src = series.pages()[static_cast<std::size_t>(p)].url;
    for (const auto& link : snap.out_links) {
      const auto it = by_url.find(link);
      if (it == by_url.end()) {
        ++graph.out_of_series_links[static_cast<std::size_t>(p)];
        continue;
      }
      graph.out_edges[static_cast<std::size_t>(p)].push_back(
          {it->second, classify_link(src, link)});
    }
  }
  return graph;
}

namespace {

ScoreVector stationary_scores(const SnapshotGraph& graph,
                              const Eigen::VectorXd& restart, double damping,
                              double tol, int max_iter) {
  const int n = graph.n_nodes;
  if (n == 0) throw invalid_argument_error("graph is empty");

  Eigen::VectorXd x = restart;
  Eigen::VectorXd next(n);
  double residual = 0.0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    next.setZero();
    double dangling_mass = 0.0;
    for (int p = 0; p < n; ++p) {
      const auto& edges = graph.out_edges[static_cast<std::size_t>(p)];
      if (edges.empty()) {
        dangling_mass += x(p);
        continue;
      }
      const double share = x(p) / static_cast<double>(edges.size());
      for (const Edge& e : edges) next(e.target) += share;
    }
    next = damping * (next + dangling_mass * restart) + (1.0 - damping) * restart;
    residual = (next - x).lpNorm<1>();
    x.swap(next);
    if (residual < tol) {
      return {std::move(x), damping, iter, residual};
    }
  }
  throw convergence_error("power iteration did not converge (residual " +
                              std::to_string(residual) + ")",
                          residual);
}

}  // namespace

ScoreVector pagerank(const SnapshotGraph& graph, double damping, double tol,
                     int max_iter) {
  const int n = graph.n_nodes;
  if (n == 0) throw invalid_argument_error("graph is empty");
  const Eigen::VectorXd restart =
      Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return stationary_scores(graph, restart, damping, tol, max_iter);
}

ScoreVector trustrank(const SnapshotGraph& graph, const std::vector<int>& trusted,
                      double damping, double tol, int max_iter) {
  const int n = graph.n_nodes;
  if (n == 0) throw invalid_argument_error("graph is empty");
  if (trusted.empty()) throw invalid_argument_error("trusted set is empty");
  Eigen::VectorXd restart = Eigen::VectorXd::Zero(n);
  for (int t : trusted) {
    if (t < 0 || t >= n) throw invalid_argument_error("trusted id out of range");
    restart(t) = 1.0;
  }
  restart /= restart.sum();
  return stationary_scores(graph, restart, damping, tol, max_iter);
}

std::vector<InlinkCounts> inlink_counts(const SnapshotGraph& graph) {
  std::vector<InlinkCounts> counts(static_cast<std::size_t>(graph.n_nodes));
  for (const auto& edges : graph.out_edges) {
    for (const Edge& e : edges) {
      auto& c = counts[static_cast<std::size_t>(e.target)];
      if (e.scope == LinkScope::Internal) {
        ++c.internal;
      } else {
        ++c.external;
      }
    }
  }
  return counts;
}

}  // namespace linkpred
