#include "linkpred/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "linkpred/errors.hpp"

namespace linkpred {

CrawlSeries::CrawlSeries(std::vector<PageId> pages,
                         std::vector<std::int64_t> crawl_times,
                         std::vector<std::vector<PageSnapshot>> snapshots,
                         std::string digest_algorithm)
    : pages_(std::move(pages)),
      crawl_times_(std::move(crawl_times)),
      snapshots_(std::move(snapshots)),
      digest_algorithm_(std::move(digest_algorithm)) {
  if (crawl_times_.size() < 2) {
    throw invalid_argument_error("a crawl series needs at least 2 crawls");
  }
  for (std::size_t i = 1; i < crawl_times_.size(); ++i) {
    if (crawl_times_[i] <= crawl_times_[i - 1]) {
      throw invalid_argument_error("crawl times must be strictly increasing");
    }
  }
  if (snapshots_.size() != crawl_times_.size()) {
    throw invalid_argument_error("snapshot grid does not match crawl count");
  }
  for (const auto& crawl : snapshots_) {
    if (crawl.size() != pages_.size()) {
      throw invalid_argument_error("snapshot grid does not match page count");
    }
  }
  for (std::size_t p = 0; p < pages_.size(); ++p) {
    if (pages_[p].id != static_cast<int>(p)) {
      throw invalid_argument_error("page ids must be dense 0..n-1");
    }
  }
  for (const auto& crawl : snapshots_) {
    for (const auto& snap : crawl) {
      if (snap.content_size < 1) {
        throw invalid_argument_error("non-empty pages required: " + snap.url);
      }
      if (snap.content_digest.empty()) {
        throw invalid_argument_error("missing content digest: " + snap.url);
      }
      if (snap.semantic_vector &&
          std::abs(snap.semantic_vector->norm() - 1.0) > 1e-6) {
        throw invalid_argument_error("semantic vector not unit norm: " + snap.url);
      }
      if (!std::is_sorted(snap.out_links.begin(), snap.out_links.end()) ||
          std::adjacent_find(snap.out_links.begin(), snap.out_links.end()) !=
              snap.out_links.end()) {
        throw invalid_argument_error("outlinks must be a sorted set: " + snap.url);
      }
    }
  }
}

NewOutlinks new_outlinks(const std::vector<std::string>& prev,
                         const std::vector<std::string>& curr,
                         std::string_view source_url) {
  std::vector<std::string> fresh;
  std::set_difference(curr.begin(), curr.end(), prev.begin(), prev.end(),
                      std::back_inserter(fresh));
  NewOutlinks out;
  for (auto& url : fresh) {
    if (classify_link(source_url, url) == LinkScope::Internal) {
      out.internal.push_back(std::move(url));
    } else {
      out.external.push_back(std::move(url));
    }
  }
  return out;
}

bool content_changed(std::string_view digest_prev, std::string_view digest_curr) {
  if (digest_prev.empty() || digest_curr.empty()) {
    throw missing_data_error("content digest missing");
  }
  return digest_prev != digest_curr;
}

NewOutlinkCounts count_new_outlinks(const CrawlSeries& series) {
  const int m = series.n_pages();
  const int intervals = series.interval_count();
  NewOutlinkCounts counts;
  counts.internal = Eigen::MatrixXd::Zero(intervals, m);
  counts.external = Eigen::MatrixXd::Zero(intervals, m);
  for (int p = 0; p < m; ++p) {
    const std::string& url = series.pages()[static_cast<std::size_t>(p)].url;
    for (int i = 0; i < intervals; ++i) {
      const auto added = new_outlinks(series.snapshot(i, p).out_links,
                                      series.snapshot(i + 1, p).out_links, url);
      counts.internal(i, p) = static_cast<double>(added.internal.size());
      counts.external(i, p) = static_cast<double>(added.external.size());
    }
  }
  return counts;
}

Eigen::MatrixXd content_change_flags(const CrawlSeries& series) {
  const int m = series.n_pages();
  const int intervals = series.interval_count();
  Eigen::MatrixXd flags = Eigen::MatrixXd::Zero(intervals, m);
  for (int p = 0; p < m; ++p) {
    for (int i = 0; i < intervals; ++i) {
      flags(i, p) = content_changed(series.snapshot(i, p).content_digest,
                                    series.snapshot(i + 1, p).content_digest)
                        ? 1.0
                        : 0.0;
    }
  }
  return flags;
}

namespace {

// days since 1970-01-01 for a civil date (Howard Hinnant's algorithm)
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                       static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::int64_t parse_iso8601(std::string_view text) {
  int y, mo, d, h, mi, s;
  char z = '\0';
  const std::string buf(text);
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi,
                  &s, &z) < 6 ||
      (z != 'Z' && z != '\0') || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 ||
      mi > 59 || s > 60) {
    throw malformed_input_error("bad ISO-8601 timestamp: '" + buf + "'");
  }
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60));
  return buf;
}

}  // namespace linkpred
