#include "linkpred/ingestion.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "linkpred/errors.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/rng.hpp"

namespace linkpred {

namespace {

using json = nlohmann::ordered_json;

struct RawRecord {
  PageSnapshot snap;
  bool valid = false;
  std::string reason;
};

RawRecord parse_record(const std::string& line) {
  RawRecord rec;
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    rec.reason = std::string("bad json: ") + e.what();
    return rec;
  }
  try {
    PageSnapshot snap;
    const std::string raw_url = doc.at("url").get<std::string>();
    snap.url = normalize_url(raw_url);
    if (Url::parse(snap.url).scheme.empty()) {
      rec.reason = "page url has no scheme";
      return rec;
    }
    snap.fetch_time = parse_iso8601(doc.at("fetch_time").get<std::string>());
    for (const auto& item : doc.at("out_links")) {
      try {
        std::string link = normalize_url(item.get<std::string>());
        if (!Url::parse(link).scheme.empty()) snap.out_links.push_back(std::move(link));
      } catch (const malformed_input_error&) {
        // unusable outlink, dropped
      }
    }
    std::sort(snap.out_links.begin(), snap.out_links.end());
    snap.out_links.erase(
        std::unique(snap.out_links.begin(), snap.out_links.end()),
        snap.out_links.end());
    snap.content_digest = doc.at("content_digest").get<std::string>();
    snap.content_size = doc.at("content_size").get<std::int64_t>();
    snap.text_size = doc.at("text_size").get<std::int64_t>();
    snap.text_quality = doc.at("text_quality").get<double>();
    if (snap.content_digest.empty()) {
      rec.reason = "empty content digest";
      return rec;
    }
    if (snap.content_size < 1) {
      rec.reason = "empty page content";
      return rec;
    }
    if (snap.text_size < 0 || snap.text_quality < 0.0 || snap.text_quality > 1.0) {
      rec.reason = "text fields out of range";
      return rec;
    }
    if (doc.contains("semantic_vector")) {
      const auto& arr = doc["semantic_vector"];
      Eigen::VectorXd v(arr.size());
      for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<int>(i)) = arr[i].get<double>();
      const double norm = v.norm();
      if (norm > 0.0 && std::isfinite(norm)) {
        // keep exact bits when already unit, so round-trips are byte-stable
        if (std::abs(norm - 1.0) > 1e-9) v /= norm;
        snap.semantic_vector = std::move(v);
      }
    }
    if (doc.contains("pagerank")) snap.pagerank = doc["pagerank"].get<double>();
    if (doc.contains("trustrank")) snap.trustrank = doc["trustrank"].get<double>();
    if (doc.contains("inlinks_int") && doc.contains("inlinks_ext")) {
      snap.inlinks = InlinkCounts{doc["inlinks_int"].get<int>(),
                                  doc["inlinks_ext"].get<int>()};
    }
    rec.snap = std::move(snap);
    rec.valid = true;
  } catch (const json::exception& e) {
    rec.reason = std::string("bad field: ") + e.what();
  } catch (const malformed_input_error& e) {
    rec.reason = e.what();
  }
  return rec;
}

std::string tld_of(const std::string& url) {
  const Url u = Url::parse(url);
  const auto dot = u.host.rfind('.');
  return dot == std::string::npos ? u.host : u.host.substr(dot + 1);
}

std::int64_t median_time(std::vector<std::int64_t> times) {
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

// Fill inlink counts, PageRank and TrustRank per crawl when any page lacks
// them in the input; recomputation keeps a consistent closed-world view.
void backfill_graph_scores(CrawlSeries& series, double damping) {
  const int m = series.n_pages();
  for (int t = 0; t < series.n_crawls(); ++t) {
    bool need_inlinks = false, need_pr = false, need_tr = false;
    for (int p = 0; p < m; ++p) {
      const auto& snap = series.snapshot(t, p);
      need_inlinks |= !snap.inlinks.has_value();
      need_pr |= !snap.pagerank.has_value();
      need_tr |= !snap.trustrank.has_value();
    }
    if (!need_inlinks && !need_pr && !need_tr) continue;

    const SnapshotGraph graph = build_graph(series, t);
    const auto counts = inlink_counts(graph);
    if (need_inlinks) {
      for (int p = 0; p < m; ++p) {
        series.mutable_snapshot(t, p).inlinks = counts[static_cast<std::size_t>(p)];
      }
    }
    if (need_pr) {
      const ScoreVector pr = pagerank(graph, damping);
      for (int p = 0; p < m; ++p) {
        series.mutable_snapshot(t, p).pagerank = pr.scores(p);
      }
    }
    if (need_tr) {
      // no trusted flag in the input: top 1% pages by internal inlinks
      std::vector<int> order(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return counts[static_cast<std::size_t>(a)].internal >
               counts[static_cast<std::size_t>(b)].internal;
      });
      const int n_trusted = std::max(1, m / 100);
      const std::vector<int> trusted(order.begin(), order.begin() + n_trusted);
      const ScoreVector tr = trustrank(graph, trusted, damping);
      for (int p = 0; p < m; ++p) {
        series.mutable_snapshot(t, p).trustrank = tr.scores(p);
      }
    }
  }
}

}  // namespace

std::string IngestReport::summary() const {
  std::ostringstream out;
  out << "records read:          " << records_read << "\n"
      << "unique pages read:     " << pages_read << "\n"
      << "pages kept:            " << pages_kept << "\n"
      << "discarded (incomplete):" << pages_discarded_incomplete << "\n"
      << "discarded (invalid):   " << pages_discarded_invalid << "\n"
      << "top TLDs of kept pages:\n";
  std::vector<std::pair<std::string, long>> tlds(tld_histogram.begin(),
                                                 tld_histogram.end());
  std::stable_sort(tlds.begin(), tlds.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  int shown = 0;
  for (const auto& [tld, count] : tlds) {
    out << "  ." << tld << "  " << count << "\n";
    if (++shown == 20) break;
  }
  return out.str();
}

std::pair<CrawlSeries, IngestReport> load_crawl_series(
    const std::vector<SnapshotFile>& files, const LoadOptions& options) {
  if (files.size() < 2) {
    throw invalid_argument_error("need at least 2 snapshot files");
  }
  std::vector<SnapshotFile> ordered = files;
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.crawl_index < b.crawl_index; });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].crawl_index != static_cast<int>(i) + 1) {
      throw invalid_argument_error("crawl indices must be contiguous from 1");
    }
  }
  const int n = static_cast<int>(ordered.size());

  IngestReport report;
  // per url: snapshot per crawl (if present and parseable) + validity
  struct PageTimeline {
    std::vector<std::optional<PageSnapshot>> per_crawl;
    bool invalid = false;
  };
  std::unordered_map<std::string, PageTimeline> timelines;
  std::vector<std::vector<std::int64_t>> fetch_times(static_cast<std::size_t>(n));

  for (int t = 0; t < n; ++t) {
    std::ifstream in(ordered[static_cast<std::size_t>(t)].path);
    if (!in) {
      throw io_error("cannot open snapshot file: " +
                     ordered[static_cast<std::size_t>(t)].path);
    }
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++report.records_read;
      RawRecord rec = parse_record(line);
      if (!rec.valid && rec.snap.url.empty()) {
        // record without a usable URL; counted as read but outside the
        // per-page accounting
        continue;
      }
      const std::string url =
          rec.valid ? rec.snap.url : normalize_url(json::parse(line, nullptr, false)
                                                       .value("url", std::string()));
      auto& timeline = timelines[url];
      if (timeline.per_crawl.empty()) {
        timeline.per_crawl.resize(static_cast<std::size_t>(n));
      }
      if (!rec.valid) {
        timeline.invalid = true;
        continue;
      }
      if (timeline.per_crawl[static_cast<std::size_t>(t)].has_value()) {
        timeline.invalid = true;  // duplicate record for the same crawl
        continue;
      }
      fetch_times[static_cast<std::size_t>(t)].push_back(rec.snap.fetch_time);
      timeline.per_crawl[static_cast<std::size_t>(t)] = std::move(rec.snap);
    }
  }

  report.pages_read = static_cast<long>(timelines.size());

  std::vector<std::string> kept_urls;
  for (auto& [url, timeline] : timelines) {
    if (timeline.invalid) {
      ++report.pages_discarded_invalid;
      continue;
    }
    bool complete = true;
    for (const auto& snap : timeline.per_crawl) {
      if (!snap.has_value() ||
          (options.require_semantic && !snap->semantic_vector.has_value())) {
        complete = false;
        break;
      }
    }
    if (!complete) {
      ++report.pages_discarded_incomplete;
      continue;
    }
    kept_urls.push_back(url);
  }
  report.pages_kept = static_cast<long>(kept_urls.size());
  if (kept_urls.empty()) {
    throw empty_series_error("no page survived ingestion");
  }
  std::sort(kept_urls.begin(), kept_urls.end());

  std::vector<PageId> pages;
  pages.reserve(kept_urls.size());
  for (const auto& url : kept_urls) {
    pages.push_back({url, static_cast<int>(pages.size())});
    ++report.tld_histogram[tld_of(url)];
  }

  std::vector<std::int64_t> crawl_times;
  for (int t = 0; t < n; ++t) {
    if (fetch_times[static_cast<std::size_t>(t)].empty()) {
      throw empty_series_error("crawl " + std::to_string(t + 1) +
                               " has no valid records");
    }
    crawl_times.push_back(median_time(fetch_times[static_cast<std::size_t>(t)]));
  }

  std::vector<std::vector<PageSnapshot>> grid(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    grid[static_cast<std::size_t>(t)].reserve(kept_urls.size());
    for (const auto& url : kept_urls) {
      grid[static_cast<std::size_t>(t)].push_back(
          std::move(*timelines[url].per_crawl[static_cast<std::size_t>(t)]));
    }
  }

  CrawlSeries series(std::move(pages), std::move(crawl_times), std::move(grid));
  if (options.backfill_graph_scores) {
    backfill_graph_scores(series, options.damping);
  }
  return {std::move(series), std::move(report)};
}

std::string snapshot_to_json_line(const PageSnapshot& snap) {
  json doc;
  doc["url"] = snap.url;
  doc["fetch_time"] = format_iso8601(snap.fetch_time);
  doc["out_links"] = snap.out_links;
  doc["content_digest"] = snap.content_digest;
  doc["content_size"] = snap.content_size;
  doc["text_size"] = snap.text_size;
  doc["text_quality"] = snap.text_quality;
  if (snap.semantic_vector) {
    std::vector<double> v(snap.semantic_vector->data(),
                          snap.semantic_vector->data() + snap.semantic_vector->size());
    doc["semantic_vector"] = v;
  }
  if (snap.pagerank) doc["pagerank"] = *snap.pagerank;
  if (snap.trustrank) doc["trustrank"] = *snap.trustrank;
  if (snap.inlinks) {
    doc["inlinks_int"] = snap.inlinks->internal;
    doc["inlinks_ext"] = snap.inlinks->external;
  }
  return doc.dump();
}

std::vector<SnapshotFile> write_crawl_series(const CrawlSeries& series,
                                             const std::string& directory) {
  std::filesystem::create_directories(directory);
  std::vector<SnapshotFile> files;
  for (int t = 0; t < series.n_crawls(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "crawl-%02d.jsonl", t + 1);
    const std::string path = (std::filesystem::path(directory) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    for (int p = 0; p < series.n_pages(); ++p) {
      out << snapshot_to_json_line(series.snapshot(t, p)) << '\n';
    }
    files.push_back({path, t + 1});
  }
  return files;
}

Eigen::VectorXd normalize_semantic(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw invalid_argument_error("empty vector");
  const double norm = v.norm();
  if (norm == 0.0 || !std::isfinite(norm)) {
    throw invalid_argument_error("degenerate semantic vector (zero norm)");
  }
  return v / norm;
}

Eigen::MatrixXd embed_corpus(const std::vector<std::vector<std::string>>& texts,
                             int dim, std::uint64_t seed) {
  if (texts.empty()) throw invalid_argument_error("empty corpus");
  const int n_docs = static_cast<int>(texts.size());

  std::map<std::string, int> vocab;  // ordered: deterministic column layout
  for (const auto& doc : texts) {
    for (const auto& tok : doc) vocab.emplace(tok, 0);
  }
  if (vocab.empty()) {
    throw invalid_argument_error("degenerate corpus: all documents empty");
  }
  int col = 0;
  for (auto& [tok, idx] : vocab) idx = col++;
  const int n_terms = col;

  Eigen::MatrixXd tf = Eigen::MatrixXd::Zero(n_docs, n_terms);
  for (int d = 0; d < n_docs; ++d) {
    for (const auto& tok : texts[static_cast<std::size_t>(d)]) {
      tf(d, vocab[tok]) += 1.0;
    }
  }
  Eigen::VectorXd idf(n_terms);
  for (int j = 0; j < n_terms; ++j) {
    const double df = (tf.col(j).array() > 0.0).count();
    idf(j) = std::log(static_cast<double>(n_docs) / df);
  }
  Eigen::MatrixXd x = tf.array().rowwise() * idf.transpose().array();

  const int rank_bound = std::min(n_docs, n_terms);
  const int k = std::min(dim, rank_bound);
  const int sketch = std::min(k + 10, rank_bound);

  // randomized range finder with two power iterations
  Rng rng(split_seed(seed, 0x7fdu));
  Eigen::MatrixXd omega(n_terms, sketch);
  for (int j = 0; j < sketch; ++j) {
    for (int i = 0; i < n_terms; ++i) omega(i, j) = rng.normal();
  }
  Eigen::MatrixXd y = x * omega;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n_docs, sketch);
  for (int it = 0; it < 2; ++it) {
    Eigen::MatrixXd z = x.transpose() * q;
    Eigen::HouseholderQR<Eigen::MatrixXd> qrz(z);
    z = qrz.householderQ() * Eigen::MatrixXd::Identity(n_terms, sketch);
    y = x * z;
    qr.compute(y);
    q = qr.householderQ() * Eigen::MatrixXd::Identity(n_docs, sketch);
  }

  Eigen::MatrixXd b = q.transpose() * x;  // sketch x terms
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU);
  Eigen::MatrixXd embedding =
      q * svd.matrixU().leftCols(k) *
      svd.singularValues().head(k).asDiagonal();  // docs x k, = U S

  for (int d = 0; d < n_docs; ++d) {
    const double norm = embedding.row(d).norm();
    if (norm > 0.0) embedding.row(d) /= norm;
  }
  return embedding;
}

double fallback_text_quality(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return 0.0;
  std::unordered_set<std::string_view> distinct(tokens.begin(), tokens.end());
  const double ratio = static_cast<double>(distinct.size()) /
                       static_cast<double>(tokens.size());
  return 1.0 - std::exp(-4.0 * ratio);
}

}  // namespace linkpred
