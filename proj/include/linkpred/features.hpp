#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "linkpred/related.hpp"
#include "linkpred/snapshot.hpp"

namespace linkpred {

enum class FeatureCategory { SP, SN, DP, DN };

const char* to_string(FeatureCategory c);
FeatureCategory feature_category_from_string(const std::string& s);

enum class TargetKind { LCR, NL, NNL };

const char* to_string(TargetKind t);
TargetKind target_kind_from_string(const std::string& s);

struct ColumnInfo {
  std::string name;
  FeatureCategory category = FeatureCategory::SP;
  bool lbla = false;
};

struct FeatureSpec {
  bool use_sp = true;
  bool use_sn = false;
  bool use_dp = false;
  bool use_dn = false;
  bool include_semantic = false;   // SPsem vs SP
  bool include_pagerank = false;   // off by default, TrustRank carries SN
  int history = 0;                 // h most recent past intervals
  bool lbla_only = false;          // keep only look-back/look-around columns
  LinkScope scope = LinkScope::Internal;  // target scope (metadata)
};

// Row-per-page feature matrix with a typed column registry.
struct FeatureMatrix {
  Eigen::MatrixXd values;  // pages x columns
  std::vector<ColumnInfo> columns;
  std::vector<std::string> urls;  // row labels

  int n_rows() const { return static_cast<int>(values.rows()); }
  int n_cols() const { return static_cast<int>(values.cols()); }
  int column_index(const std::string& name) const;  // -1 when absent
};

struct TargetVector {
  Eigen::VectorXd values;
  TargetKind kind = TargetKind::NNL;
  LinkScope scope = LinkScope::Internal;
  int target_interval = -1;       // NL/NNL
  int range_first = 0, range_last = -1;  // LCR, inclusive interval range
};

// Inclusive interval range, 0-based over intervals 0..n-2.
struct IntervalRange {
  int first = 0;
  int last = 0;
  int length() const { return last - first + 1; }
};

// Fraction of intervals in `range` with >= 1 new outlink of `scope`.
double compute_lcr(const NewOutlinkCounts& counts, int page, LinkScope scope,
                   IntervalRange range);

// 1 iff the page gained a new outlink of `scope` in `interval`.
int compute_nl(const NewOutlinkCounts& counts, int page, LinkScope scope,
               int interval);

// Number of new outlinks of `scope` in `interval`.
int compute_nnl(const NewOutlinkCounts& counts, int page, LinkScope scope,
                int interval);

// Ground-truth target for every page. For LCR the range defaults to all
// n-1 intervals; NL/NNL use `target_interval`.
TargetVector compute_target(const CrawlSeries& series,
                            const NewOutlinkCounts& counts, TargetKind kind,
                            LinkScope scope, int target_interval,
                            std::optional<IntervalRange> lcr_range = std::nullopt);

// Column-clustering reducer for the semantic block: Ward agglomerative
// clustering of standardized columns; the reduced feature is the mean of
// the member columns. Fit on training rows, applied to any rows.
struct SemanticReducer {
  std::vector<int> assignment;  // column -> cluster
  int n_clusters = 0;

  Eigen::MatrixXd transform(const Eigen::MatrixXd& columns) const;
};

SemanticReducer fit_semantic_reducer(const Eigen::MatrixXd& train_columns,
                                     int n_clusters = 20);

// Assembles the feature matrix for target interval `target_interval`
// (features only use crawls <= target_interval; the neighbor LCR uses past
// intervals only). The related index is required when SN or DN is on; the
// reducer, when given with include_semantic, replaces the raw semantic
// columns by cluster means.
FeatureMatrix assemble(const CrawlSeries& series, const FeatureSpec& spec,
                       const NewOutlinkCounts& counts,
                       const RelatedPagesIndex* related, int target_interval,
                       const SemanticReducer* reducer = nullptr);

// Keeps only LBLA-flagged columns; for the LCR target the page's own
// new-outlink history is dropped as well (only related-page columns stay).
FeatureMatrix lbla_subset(const FeatureMatrix& matrix, TargetKind target_kind);

// Columnar text round-trip with (name, category, lbla) headers.
void write_feature_matrix(const FeatureMatrix& matrix, const std::string& path,
                          const std::string& file_header = {});
FeatureMatrix read_feature_matrix(const std::string& path);

}  // namespace linkpred
