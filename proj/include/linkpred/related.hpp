#pragma once

#include <Eigen/Core>
#include <vector>

namespace linkpred {

struct Neighbor {
  int page = -1;
  double weight = 0.0;      // normalized, sums to 1 per page
  double similarity = 0.0;  // raw cosine
};

// Exact top-k cosine neighborhoods over semantic vectors. Weights are the
// raw similarities clamped below at 0 and normalized to sum 1; an all-zero
// clamped row falls back to uniform weights. A page is never its own
// neighbor; neighbors come sorted by descending raw similarity.
struct RelatedPagesIndex {
  int k = 0;
  int reference_crawl = 0;  // crawl whose vectors were used
  std::vector<std::vector<Neighbor>> neighbors;  // per page

  int n_pages() const { return static_cast<int>(neighbors.size()); }
};

// Brute-force exact construction; `vectors` has one unit row per page.
// k is clamped to n_pages-1 when fewer vectors are available. `threads`
// <= 0 means hardware concurrency.
RelatedPagesIndex build_index(const Eigen::MatrixXd& vectors, int k = 30,
                              int reference_crawl = 0, int threads = 0);

// Sum of w_j * v_j; weights must sum to 1 within 1e-9.
double weighted_average(const Eigen::VectorXd& values,
                        const Eigen::VectorXd& weights);

// Per-page weighted average of the neighbors' entries of `values`
// (values indexed by page id). NaN entries are missing data.
Eigen::VectorXd neighbor_weighted_average(const RelatedPagesIndex& index,
                                          const Eigen::VectorXd& values);

}  // namespace linkpred
