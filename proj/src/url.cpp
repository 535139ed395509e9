#include "linkpred/url.hpp"

#include <algorithm>
#include <cctype>

#include "linkpred/errors.hpp"

namespace linkpred {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool valid_scheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '+' || c == '-' || c == '.';
  });
}

}  // namespace

Url Url::parse(std::string_view url) {
  std::string_view rest = url;

  // drop the fragment first, it never takes part in any comparison
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
    rest = rest.substr(0, hash);
  }

  Url out;
  if (const auto sep = rest.find("://"); sep != std::string_view::npos &&
                                         valid_scheme(rest.substr(0, sep))) {
    out.scheme = lower(rest.substr(0, sep));
    rest = rest.substr(sep + 3);
  }

  const auto path_start = rest.find_first_of("/?");
  std::string_view authority =
      path_start == std::string_view::npos ? rest : rest.substr(0, path_start);
  // userinfo and port are not part of the host identity used here
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }
  if (const auto colon = authority.find(':'); colon != std::string_view::npos) {
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) {
    throw malformed_input_error("URL has no host: '" + std::string(url) + "'");
  }
  out.host = lower(authority);

  if (path_start != std::string_view::npos) {
    std::string_view tail = rest.substr(path_start);
    if (const auto q = tail.find('?'); q != std::string_view::npos) {
      out.query = std::string(tail.substr(q + 1));
      tail = tail.substr(0, q);
    }
    out.path = std::string(tail);
  }
  return out;
}

int Url::path_depth() const {
  int depth = 0;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const auto next = path.find('/', pos);
    const auto len = (next == std::string::npos ? path.size() : next) - pos;
    if (len > 0) ++depth;
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return depth;
}

int Url::domain_depth() const {
  if (host.empty()) return 0;
  return 1 + static_cast<int>(std::count(host.begin(), host.end(), '.'));
}

UrlDepths url_depths(std::string_view url) {
  const Url u = Url::parse(url);
  return {u.path_depth(), u.domain_depth()};
}

LinkScope classify_link(std::string_view source_url, std::string_view target_url) {
  const Url src = Url::parse(source_url);
  const Url dst = Url::parse(target_url);
  if (src.scheme.empty()) {
    throw malformed_input_error("source URL has no scheme: '" +
                                std::string(source_url) + "'");
  }
  if (dst.scheme.empty()) {
    throw malformed_input_error("target URL has no scheme: '" +
                                std::string(target_url) + "'");
  }
  return (src.host == dst.host && src.scheme == dst.scheme)
             ? LinkScope::Internal
             : LinkScope::External;
}

std::string normalize_url(std::string_view url) {
  Url u = Url::parse(url);
  if (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
  std::string out;
  if (!u.scheme.empty()) {
    out += u.scheme;
    out += "://";
  }
  out += u.host;
  out += u.path;
  if (!u.query.empty()) {
    out += '?';
    out += u.query;
  }
  return out;
}

}  // namespace linkpred
