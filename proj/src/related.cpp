#include "linkpred/related.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "linkpred/errors.hpp"

namespace linkpred {

namespace {

void finalize_weights(std::vector<Neighbor>& neighbors) {
  double total = 0.0;
  for (auto& nb : neighbors) {
    nb.weight = std::max(nb.similarity, 0.0);
    total += nb.weight;
  }
  if (total > 0.0) {
    for (auto& nb : neighbors) nb.weight /= total;
  } else {
    const double uniform = 1.0 / static_cast<double>(neighbors.size());
    for (auto& nb : neighbors) nb.weight = uniform;
  }
}

}  // namespace

RelatedPagesIndex build_index(const Eigen::MatrixXd& vectors, int k,
                              int reference_crawl, int threads) {
  const int m = static_cast<int>(vectors.rows());
  if (m < 2) throw invalid_argument_error("need at least 2 pages for neighbors");
  if (k < 1) throw invalid_argument_error("k must be >= 1");
  k = std::min(k, m - 1);

  RelatedPagesIndex index;
  index.k = k;
  index.reference_crawl = reference_crawl;
  index.neighbors.resize(static_cast<std::size_t>(m));

  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }

  // rows are unit vectors, so cosine similarity is a plain dot product;
  // block the query side to keep the similarity buffer small
  const int block = 256;
  auto work = [&](int begin, int end) {
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int row0 = begin; row0 < end; row0 += block) {
      const int rows = std::min(block, end - row0);
      const Eigen::MatrixXd sims =
          vectors.middleRows(row0, rows) * vectors.transpose();
      for (int r = 0; r < rows; ++r) {
        const int query = row0 + r;
        std::iota(order.begin(), order.end(), 0);
        order.erase(order.begin() + query);
        // ties broken by page id for determinism
        std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                         [&](int a, int b) {
                           const double sa = sims(r, a), sb = sims(r, b);
                           return sa != sb ? sa > sb : a < b;
                         });
        order.resize(static_cast<std::size_t>(k));
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          const double sa = sims(r, a), sb = sims(r, b);
          return sa != sb ? sa > sb : a < b;
        });
        auto& out = index.neighbors[static_cast<std::size_t>(query)];
        out.reserve(static_cast<std::size_t>(k));
        for (int id : order) out.push_back({id, 0.0, sims(r, id)});
        finalize_weights(out);
        order.resize(static_cast<std::size_t>(m));
      }
    }
  };

  if (threads == 1 || m < 512) {
    work(0, m);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (m + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(m, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return index;
}

double weighted_average(const Eigen::VectorXd& values,
                        const Eigen::VectorXd& weights) {
  if (values.size() != weights.size() || values.size() == 0) {
    throw invalid_argument_error("values/weights length mismatch");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) {
    throw invalid_argument_error("weights must sum to 1");
  }
  return values.dot(weights);
}

Eigen::VectorXd neighbor_weighted_average(const RelatedPagesIndex& index,
                                          const Eigen::VectorXd& values) {
  if (values.size() != index.n_pages()) {
    throw invalid_argument_error("values length does not match index");
  }
  Eigen::VectorXd out(index.n_pages());
  for (int p = 0; p < index.n_pages(); ++p) {
    double acc = 0.0;
    for (const Neighbor& nb : index.neighbors[static_cast<std::size_t>(p)]) {
      const double v = values(nb.page);
      if (std::isnan(v)) {
        throw missing_data_error("missing neighbor value for page " +
                                 std::to_string(nb.page));
      }
      acc += nb.weight * v;
    }
    out(p) = acc;
  }
  return out;
}

}  // namespace linkpred
