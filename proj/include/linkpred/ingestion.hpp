#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "linkpred/snapshot.hpp"

namespace linkpred {

struct SnapshotFile {
  std::string path;
  int crawl_index = 0;  // 1-based, contiguous
};

struct IngestReport {
  long records_read = 0;
  long pages_read = 0;  // unique URLs seen anywhere
  long pages_kept = 0;
  long pages_discarded_incomplete = 0;
  long pages_discarded_invalid = 0;
  std::map<std::string, long> tld_histogram;  // kept pages per TLD

  std::string summary() const;
};

struct LoadOptions {
  // Pages missing the semantic vector in any crawl are discarded
  // (mirrors how the source dataset was cleaned).
  bool require_semantic = true;
  // Recompute inlink counts / PageRank / TrustRank per crawl when any
  // page lacks them in the input.
  bool backfill_graph_scores = true;
  double damping = 0.85;
};

// Loads one file per crawl, keeps only pages present and valid in ALL
// crawls, and accounts for every input record. Crawl times are per-file
// fetch-time medians. Throws io_error / empty_series_error.
std::pair<CrawlSeries, IngestReport> load_crawl_series(
    const std::vector<SnapshotFile>& files, const LoadOptions& options = {});

// Writes the canonical line-delimited snapshot format, one file per crawl
// named crawl-XX.jsonl under `directory`. Returns the file list.
std::vector<SnapshotFile> write_crawl_series(const CrawlSeries& series,
                                             const std::string& directory);

// Serializes one snapshot as a canonical JSON line (stable field order,
// shortest round-trip doubles), used by write_crawl_series.
std::string snapshot_to_json_line(const PageSnapshot& snap);

// v / |v|_2. Zero (or non-finite) vectors are degenerate.
Eigen::VectorXd normalize_semantic(const Eigen::VectorXd& v);

// TF-IDF matrix of the corpus (TF = raw count, IDF = ln(N/df)) reduced to
// `dim` dimensions by randomized truncated SVD; rows are normalized to unit
// norm. dim is clamped to min(#docs, #vocabulary). Rows of empty documents
// come back as zero vectors.
Eigen::MatrixXd embed_corpus(const std::vector<std::vector<std::string>>& texts,
                             int dim = kSemanticDim, std::uint64_t seed = 0);

// 1 - exp(-4 V/D) where V = distinct tokens and D = total tokens; 0 for
// empty text. A reproducible stand-in for an opaque upstream score.
double fallback_text_quality(const std::vector<std::string>& tokens);

}  // namespace linkpred
