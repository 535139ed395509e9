#pragma once

#include <string>
#include <string_view>

namespace linkpred {

// Link scope relative to a source page: a target on the same host served
// over the same scheme is Internal, everything else (including a bare
// http/https mismatch) is External.
enum class LinkScope { Internal, External };

inline const char* to_string(LinkScope s) {
  return s == LinkScope::Internal ? "internal" : "external";
}

// Decomposed URL. Host comparison is case-insensitive, so the host is
// stored lowercased. A missing scheme is allowed at parse time; operations
// that need one (link classification) reject such URLs.
struct Url {
  std::string scheme;  // lowercased, may be empty
  std::string host;    // lowercased
  std::string path;    // leading '/', may be empty
  std::string query;   // without '?', may be empty

  // Parses an absolute URL. The fragment is dropped. Throws
  // malformed_input_error when no host can be extracted.
  static Url parse(std::string_view url);

  // Number of non-empty path segments.
  int path_depth() const;
  // Number of dot-separated host labels.
  int domain_depth() const;
};

struct UrlDepths {
  int path_depth = 0;
  int domain_depth = 0;
};

// Path depth and domain depth of a URL, e.g. domain.com/en/news/article/
// has path depth 3 and sub.domain.com has domain depth 3.
UrlDepths url_depths(std::string_view url);

// Scope of the link source -> target. Both URLs must carry a scheme and a
// host. Internal requires equal host (case-insensitive, subdomains not
// collapsed) and equal scheme.
LinkScope classify_link(std::string_view source_url, std::string_view target_url);

// Canonical form used for outlink set comparison: fragment stripped,
// trailing slash on the path stripped, query retained, scheme/host
// lowercased. Parse failures propagate.
std::string normalize_url(std::string_view url);

}  // namespace linkpred
