#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linkpred/url.hpp"

namespace linkpred {

// Expected dimension of the semantic embedding.
inline constexpr int kSemanticDim = 192;

struct PageId {
  std::string url;  // absolute, normalized (see normalize_url)
  int id = -1;      // dense index, stable across all crawls of a series
};

struct InlinkCounts {
  int internal = 0;
  int external = 0;
};

// One page at one crawl time. Immutable once the owning CrawlSeries is
// assembled. Outlinks are kept as a sorted, deduplicated vector of
// normalized URLs (set semantics).
struct PageSnapshot {
  std::string url;
  std::int64_t fetch_time = 0;  // seconds since epoch, UTC
  std::vector<std::string> out_links;
  std::string content_digest;  // lowercase hex, non-empty
  std::int64_t content_size = 1;
  std::int64_t text_size = 0;
  double text_quality = 0.0;
  std::optional<Eigen::VectorXd> semantic_vector;  // unit L2 norm when present
  std::optional<double> pagerank;
  std::optional<double> trustrank;
  std::optional<InlinkCounts> inlinks;
};

// Aligned snapshots of the same page set across n >= 2 crawls; snapshot(t, p)
// exists for every crawl t and page p (pages without a complete timeline are
// discarded at ingestion).
class CrawlSeries {
 public:
  CrawlSeries() = default;
  // `snapshots` is indexed [crawl][page]; validates shape, crawl time
  // ordering and per-snapshot invariants. Throws invalid_argument_error.
  CrawlSeries(std::vector<PageId> pages, std::vector<std::int64_t> crawl_times,
              std::vector<std::vector<PageSnapshot>> snapshots,
              std::string digest_algorithm = "sha256");

  int n_pages() const { return static_cast<int>(pages_.size()); }
  int n_crawls() const { return static_cast<int>(crawl_times_.size()); }
  int interval_count() const { return n_crawls() - 1; }

  const std::vector<PageId>& pages() const { return pages_; }
  const std::vector<std::int64_t>& crawl_times() const { return crawl_times_; }
  const PageSnapshot& snapshot(int crawl, int page) const {
    return snapshots_[static_cast<std::size_t>(crawl)][static_cast<std::size_t>(page)];
  }
  const std::vector<PageSnapshot>& crawl(int crawl) const {
    return snapshots_[static_cast<std::size_t>(crawl)];
  }
  const std::string& digest_algorithm() const { return digest_algorithm_; }

  // Mutable access used by ingestion to backfill recomputed graph scores
  // before the series is handed out.
  PageSnapshot& mutable_snapshot(int crawl, int page) {
    return snapshots_[static_cast<std::size_t>(crawl)][static_cast<std::size_t>(page)];
  }

 private:
  std::vector<PageId> pages_;
  std::vector<std::int64_t> crawl_times_;
  std::vector<std::vector<PageSnapshot>> snapshots_;
  std::string digest_algorithm_;
};

struct NewOutlinks {
  std::vector<std::string> internal;
  std::vector<std::string> external;
};

// curr \ prev, partitioned by scope relative to the source URL. Inputs are
// url sets (sorted or not); comparison happens on the raw strings, so both
// sides are expected to be normalized already.
NewOutlinks new_outlinks(const std::vector<std::string>& prev,
                         const std::vector<std::string>& curr,
                         std::string_view source_url);

// True iff the digests differ byte-for-byte. Empty digests are missing data.
bool content_changed(std::string_view digest_prev, std::string_view digest_curr);

// Per-interval, per-page counts of new outlinks, one matrix per scope.
// Rows are intervals 0..n-2 (interval i covers crawls i -> i+1), columns
// are pages. This table backs features, targets and baselines alike.
struct NewOutlinkCounts {
  Eigen::MatrixXd internal;  // (n-1) x pages
  Eigen::MatrixXd external;

  const Eigen::MatrixXd& scoped(LinkScope scope) const {
    return scope == LinkScope::Internal ? internal : external;
  }
};

NewOutlinkCounts count_new_outlinks(const CrawlSeries& series);

// Per-interval, per-page content change flags (0/1), rows are intervals.
Eigen::MatrixXd content_change_flags(const CrawlSeries& series);

// ISO-8601 timestamp helpers for the canonical snapshot format
// ("YYYY-MM-DDThh:mm:ssZ", UTC only).
std::int64_t parse_iso8601(std::string_view text);
std::string format_iso8601(std::int64_t seconds_since_epoch);

}  // namespace linkpred
