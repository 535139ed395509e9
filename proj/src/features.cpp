#include "linkpred/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "linkpred/errors.hpp"

namespace linkpred {

const char* to_string(FeatureCategory c) {
  switch (c) {
    case FeatureCategory::SP: return "SP";
    case FeatureCategory::SN: return "SN";
    case FeatureCategory::DP: return "DP";
    case FeatureCategory::DN: return "DN";
  }
  return "?";
}

FeatureCategory feature_category_from_string(const std::string& s) {
  if (s == "SP") return FeatureCategory::SP;
  if (s == "SN") return FeatureCategory::SN;
  if (s == "DP") return FeatureCategory::DP;
  if (s == "DN") return FeatureCategory::DN;
  throw invalid_argument_error("unknown feature category: " + s);
}

const char* to_string(TargetKind t) {
  switch (t) {
    case TargetKind::LCR: return "lcr";
    case TargetKind::NL: return "nl";
    case TargetKind::NNL: return "nnl";
  }
  return "?";
}

TargetKind target_kind_from_string(const std::string& s) {
  if (s == "lcr") return TargetKind::LCR;
  if (s == "nl") return TargetKind::NL;
  if (s == "nnl") return TargetKind::NNL;
  throw invalid_argument_error("unknown target kind: " + s);
}

int FeatureMatrix::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

double compute_lcr(const NewOutlinkCounts& counts, int page, LinkScope scope,
                   IntervalRange range) {
  const auto& table = counts.scoped(scope);
  if (range.first < 0 || range.last >= table.rows() || range.length() < 1) {
    throw invalid_argument_error("empty or out-of-range interval range");
  }
  int changed = 0;
  for (int i = range.first; i <= range.last; ++i) {
    if (table(i, page) > 0.0) ++changed;
  }
  return static_cast<double>(changed) / static_cast<double>(range.length());
}

int compute_nl(const NewOutlinkCounts& counts, int page, LinkScope scope,
               int interval) {
  return counts.scoped(scope)(interval, page) > 0.0 ? 1 : 0;
}

int compute_nnl(const NewOutlinkCounts& counts, int page, LinkScope scope,
                int interval) {
  return static_cast<int>(counts.scoped(scope)(interval, page));
}

TargetVector compute_target(const CrawlSeries& series,
                            const NewOutlinkCounts& counts, TargetKind kind,
                            LinkScope scope, int target_interval,
                            std::optional<IntervalRange> lcr_range) {
  const int m = series.n_pages();
  TargetVector target;
  target.kind = kind;
  target.scope = scope;
  target.values.resize(m);
  if (kind == TargetKind::LCR) {
    const IntervalRange range =
        lcr_range.value_or(IntervalRange{0, series.interval_count() - 1});
    target.range_first = range.first;
    target.range_last = range.last;
    for (int p = 0; p < m; ++p) target.values(p) = compute_lcr(counts, p, scope, range);
  } else {
    if (target_interval < 0 || target_interval >= series.interval_count()) {
      throw invalid_argument_error("target interval out of range");
    }
    target.target_interval = target_interval;
    for (int p = 0; p < m; ++p) {
      target.values(p) = kind == TargetKind::NL
                             ? compute_nl(counts, p, scope, target_interval)
                             : compute_nnl(counts, p, scope, target_interval);
    }
  }
  return target;
}

namespace {

constexpr int kSpScalars = 7;
const char* kSpScalarNames[kSpScalars] = {
    "content_size",        "text_size",           "text_quality",
    "n_internal_outlinks", "n_external_outlinks", "url_path_depth",
    "url_domain_depth"};
// the first five change between crawls and get lag columns
constexpr int kSpDynamic = 5;

// m x 7 table of the scalar SP values at one crawl
Eigen::MatrixXd sp_scalar_table(const CrawlSeries& series, int crawl) {
  const int m = series.n_pages();
  Eigen::MatrixXd table(m, kSpScalars);
  for (int p = 0; p < m; ++p) {
    const auto& snap = series.snapshot(crawl, p);
    const std::string& url = series.pages()[static_cast<std::size_t>(p)].url;
    int internal = 0, external = 0;
    for (const auto& link : snap.out_links) {
      if (classify_link(url, link) == LinkScope::Internal) {
        ++internal;
      } else {
        ++external;
      }
    }
    const UrlDepths depths = url_depths(url);
    table(p, 0) = static_cast<double>(snap.content_size);
    table(p, 1) = static_cast<double>(snap.text_size);
    table(p, 2) = snap.text_quality;
    table(p, 3) = internal;
    table(p, 4) = external;
    table(p, 5) = depths.path_depth;
    table(p, 6) = depths.domain_depth;
  }
  return table;
}

struct Builder {
  std::vector<ColumnInfo> columns;
  std::vector<Eigen::VectorXd> data;

  void add(std::string name, FeatureCategory category, Eigen::VectorXd values,
           bool lbla = false) {
    columns.push_back({std::move(name), category, lbla});
    data.push_back(std::move(values));
  }
};

Eigen::VectorXd snapshot_field(const CrawlSeries& series, int crawl,
                               double (*get)(const PageSnapshot&)) {
  Eigen::VectorXd out(series.n_pages());
  for (int p = 0; p < series.n_pages(); ++p) out(p) = get(series.snapshot(crawl, p));
  return out;
}

double get_inlinks_int(const PageSnapshot& s) {
  if (!s.inlinks) throw missing_data_error("inlink counts missing: " + s.url);
  return s.inlinks->internal;
}
double get_inlinks_ext(const PageSnapshot& s) {
  if (!s.inlinks) throw missing_data_error("inlink counts missing: " + s.url);
  return s.inlinks->external;
}
double get_trustrank(const PageSnapshot& s) {
  if (!s.trustrank) throw missing_data_error("trustrank missing: " + s.url);
  return *s.trustrank;
}
double get_pagerank(const PageSnapshot& s) {
  if (!s.pagerank) throw missing_data_error("pagerank missing: " + s.url);
  return *s.pagerank;
}

}  // namespace

FeatureMatrix assemble(const CrawlSeries& series, const FeatureSpec& spec,
                       const NewOutlinkCounts& counts,
                       const RelatedPagesIndex* related, int target_interval,
                       const SemanticReducer* reducer) {
  const int m = series.n_pages();
  const int t = target_interval;  // features use crawls <= t only
  if (t < 0 || t >= series.interval_count()) {
    throw invalid_argument_error("target interval out of range");
  }
  const int h = spec.history;
  if (h < 0 || h > series.n_crawls() - 2) {
    throw invalid_argument_error("history size out of range");
  }
  if (h > t) {
    throw invalid_argument_error(
        "history " + std::to_string(h) + " reaches before the first crawl "
        "(target interval " + std::to_string(t) + ")");
  }
  const bool use_sp = spec.lbla_only ? false : spec.use_sp;
  const bool use_sn = spec.lbla_only ? false : spec.use_sn;
  const bool use_dp = spec.lbla_only ? true : spec.use_dp;
  const bool use_dn = spec.lbla_only ? true : spec.use_dn;
  if ((use_sn || use_dn) && related == nullptr) {
    throw invalid_argument_error("SN/DN features need a related-pages index");
  }
  if (related && related->n_pages() != m) {
    throw invalid_argument_error("related index does not match the series");
  }
  if (use_dn && t < 1) {
    throw invalid_argument_error(
        "DN neighbor link change rate needs at least one past interval");
  }

  Builder b;
  const Eigen::MatrixXd sp_now = sp_scalar_table(series, t);

  if (use_sp) {
    for (int j = 0; j < kSpScalars; ++j) {
      b.add(kSpScalarNames[j], FeatureCategory::SP, sp_now.col(j));
    }
    if (spec.include_semantic) {
      Eigen::MatrixXd sem(m, kSemanticDim);
      for (int p = 0; p < m; ++p) {
        const auto& v = series.snapshot(t, p).semantic_vector;
        if (!v) throw missing_data_error("semantic vector missing for page " +
                                         series.pages()[static_cast<std::size_t>(p)].url);
        if (v->size() != kSemanticDim) {
          throw invalid_argument_error("semantic vector has wrong dimension");
        }
        sem.row(p) = v->transpose();
      }
      if (reducer) {
        const Eigen::MatrixXd reduced = reducer->transform(sem);
        for (int j = 0; j < reduced.cols(); ++j) {
          char name[32];
          std::snprintf(name, sizeof(name), "sem_cluster_%02d", j);
          b.add(name, FeatureCategory::SP, reduced.col(j));
        }
      } else {
        for (int j = 0; j < kSemanticDim; ++j) {
          char name[16];
          std::snprintf(name, sizeof(name), "sem_%03d", j);
          b.add(name, FeatureCategory::SP, sem.col(j));
        }
      }
    }
  }

  if (use_sn) {
    b.add("inlinks_internal", FeatureCategory::SN,
          snapshot_field(series, t, get_inlinks_int));
    b.add("inlinks_external", FeatureCategory::SN,
          snapshot_field(series, t, get_inlinks_ext));
    b.add("trustrank", FeatureCategory::SN, snapshot_field(series, t, get_trustrank));
    if (spec.include_pagerank) {
      b.add("pagerank", FeatureCategory::SN, snapshot_field(series, t, get_pagerank));
    }
    for (int j = 0; j < kSpScalars; ++j) {
      b.add(std::string("rel_") + kSpScalarNames[j], FeatureCategory::SN,
            neighbor_weighted_average(*related, sp_now.col(j)));
    }
  }

  const char* scope_name[2] = {"internal", "external"};
  const Eigen::MatrixXd* scoped[2] = {&counts.internal, &counts.external};

  if (use_dp) {
    for (int s = 0; s < 2; ++s) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
      for (int lag = 1; lag <= h; ++lag) {
        const Eigen::VectorXd col = scoped[s]->row(t - lag).transpose();
        mean += col;
        char name[48];
        std::snprintf(name, sizeof(name), "new_outlinks_%s_lag%d", scope_name[s], lag);
        b.add(name, FeatureCategory::DP, col, /*lbla=*/true);
      }
      if (h >= 1) {
        mean /= static_cast<double>(h);
        b.add(std::string("new_outlinks_") + scope_name[s] + "_mean",
              FeatureCategory::DP, mean, /*lbla=*/true);
      }
    }
    for (int lag = 1; lag <= h; ++lag) {
      const Eigen::MatrixXd sp_lag = sp_scalar_table(series, t - lag);
      for (int j = 0; j < kSpDynamic; ++j) {
        char name[48];
        std::snprintf(name, sizeof(name), "%s_lag%d", kSpScalarNames[j], lag);
        b.add(name, FeatureCategory::DP, sp_lag.col(j));
      }
    }
  }

  if (use_dn) {
    for (int lag = 1; lag <= h; ++lag) {
      char name[48];
      std::snprintf(name, sizeof(name), "inlinks_internal_lag%d", lag);
      b.add(name, FeatureCategory::DN, snapshot_field(series, t - lag, get_inlinks_int));
      std::snprintf(name, sizeof(name), "inlinks_external_lag%d", lag);
      b.add(name, FeatureCategory::DN, snapshot_field(series, t - lag, get_inlinks_ext));
      std::snprintf(name, sizeof(name), "trustrank_lag%d", lag);
      b.add(name, FeatureCategory::DN, snapshot_field(series, t - lag, get_trustrank));
      if (spec.include_pagerank) {
        std::snprintf(name, sizeof(name), "pagerank_lag%d", lag);
        b.add(name, FeatureCategory::DN, snapshot_field(series, t - lag, get_pagerank));
      }
    }
    // neighbor link change rate over ALL past intervals, independent of h
    const IntervalRange past{0, t - 1};
    for (int s = 0; s < 2; ++s) {
      const LinkScope scope = s == 0 ? LinkScope::Internal : LinkScope::External;
      Eigen::VectorXd lcr(m);
      for (int p = 0; p < m; ++p) lcr(p) = compute_lcr(counts, p, scope, past);
      b.add(std::string("rel_lcr_") + scope_name[s], FeatureCategory::DN,
            neighbor_weighted_average(*related, lcr), /*lbla=*/true);
    }
    for (int s = 0; s < 2; ++s) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
      for (int lag = 1; lag <= h; ++lag) {
        const Eigen::VectorXd col = neighbor_weighted_average(
            *related, scoped[s]->row(t - lag).transpose());
        mean += col;
        char name[48];
        std::snprintf(name, sizeof(name), "rel_new_outlinks_%s_lag%d",
                      scope_name[s], lag);
        b.add(name, FeatureCategory::DN, col, /*lbla=*/true);
      }
      if (h >= 1) {
        mean /= static_cast<double>(h);
        b.add(std::string("rel_new_outlinks_") + scope_name[s] + "_mean",
              FeatureCategory::DN, mean, /*lbla=*/true);
      }
    }
  }

  if (b.columns.empty()) {
    throw invalid_argument_error("feature spec selects no columns");
  }
  std::unordered_set<std::string> names;
  for (const auto& c : b.columns) {
    if (!names.insert(c.name).second) {
      throw invalid_argument_error("duplicate feature column: " + c.name);
    }
  }

  FeatureMatrix matrix;
  matrix.columns = std::move(b.columns);
  matrix.values.resize(m, static_cast<int>(matrix.columns.size()));
  for (std::size_t j = 0; j < b.data.size(); ++j) {
    matrix.values.col(static_cast<int>(j)) = b.data[j];
  }
  matrix.urls.reserve(static_cast<std::size_t>(m));
  for (const auto& page : series.pages()) matrix.urls.push_back(page.url);
  return matrix;
}

Eigen::MatrixXd SemanticReducer::transform(const Eigen::MatrixXd& columns) const {
  if (columns.cols() != static_cast<int>(assignment.size())) {
    throw invalid_argument_error("reducer/column count mismatch");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(columns.rows(), n_clusters);
  Eigen::VectorXd sizes = Eigen::VectorXd::Zero(n_clusters);
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    out.col(assignment[j]) += columns.col(static_cast<int>(j));
    sizes(assignment[j]) += 1.0;
  }
  for (int c = 0; c < n_clusters; ++c) out.col(c) /= sizes(c);
  return out;
}

SemanticReducer fit_semantic_reducer(const Eigen::MatrixXd& train_columns,
                                     int n_clusters) {
  const int d = static_cast<int>(train_columns.cols());
  const int rows = static_cast<int>(train_columns.rows());
  if (d < 1 || rows < 2) throw invalid_argument_error("not enough data to cluster");

  // standardize columns; constant columns carry no distance information
  Eigen::MatrixXd z(rows, d);
  int informative = 0;
  for (int j = 0; j < d; ++j) {
    const double mean = train_columns.col(j).mean();
    const double var =
        (train_columns.col(j).array() - mean).square().sum() / rows;
    if (var > 0.0) {
      z.col(j) = (train_columns.col(j).array() - mean) / std::sqrt(var);
      ++informative;
    } else {
      z.col(j).setZero();
    }
  }
  if (informative < n_clusters) {
    std::cerr << "warning: only " << informative
              << " informative columns, clamping cluster count\n";
    n_clusters = std::max(1, informative);
  }
  n_clusters = std::min(n_clusters, d);

  // Ward agglomeration via Lance-Williams updates on squared distances
  std::vector<int> size(static_cast<std::size_t>(d), 1);
  std::vector<bool> active(static_cast<std::size_t>(d), true);
  Eigen::MatrixXd dist(d, d);
  for (int i = 0; i < d; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < d; ++j) {
      const double sq = (z.col(i) - z.col(j)).squaredNorm();
      dist(i, j) = sq;
      dist(j, i) = sq;
    }
  }
  // parent forest for final labeling
  std::vector<int> parent(static_cast<std::size_t>(d));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };

  int clusters = d;
  while (clusters > n_clusters) {
    int best_i = -1, best_j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < d; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        // Ward criterion: merge cost n_i n_j / (n_i + n_j) * d2
        const double cost = dist(i, j) * size[static_cast<std::size_t>(i)] *
                            size[static_cast<std::size_t>(j)] /
                            (size[static_cast<std::size_t>(i)] +
                             size[static_cast<std::size_t>(j)]);
        if (cost < best) {
          best = cost;
          best_i = i;
          best_j = j;
        }
      }
    }
    const int ni = size[static_cast<std::size_t>(best_i)];
    const int nj = size[static_cast<std::size_t>(best_j)];
    for (int k = 0; k < d; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == best_i || k == best_j) continue;
      const int nk = size[static_cast<std::size_t>(k)];
      const double updated =
          ((ni + nk) * dist(best_i, k) + (nj + nk) * dist(best_j, k) -
           nk * dist(best_i, best_j)) /
          static_cast<double>(ni + nj + nk);
      dist(best_i, k) = updated;
      dist(k, best_i) = updated;
    }
    size[static_cast<std::size_t>(best_i)] = ni + nj;
    active[static_cast<std::size_t>(best_j)] = false;
    parent[static_cast<std::size_t>(find(best_j))] = find(best_i);
    --clusters;
  }

  // relabel clusters in order of first member column
  SemanticReducer reducer;
  reducer.assignment.resize(static_cast<std::size_t>(d));
  std::vector<int> label(static_cast<std::size_t>(d), -1);
  int next = 0;
  for (int j = 0; j < d; ++j) {
    const int root = find(j);
    if (label[static_cast<std::size_t>(root)] < 0) {
      label[static_cast<std::size_t>(root)] = next++;
    }
    reducer.assignment[static_cast<std::size_t>(j)] =
        label[static_cast<std::size_t>(root)];
  }
  reducer.n_clusters = next;
  return reducer;
}

FeatureMatrix lbla_subset(const FeatureMatrix& matrix, TargetKind target_kind) {
  std::vector<int> keep;
  for (int j = 0; j < matrix.n_cols(); ++j) {
    const auto& col = matrix.columns[static_cast<std::size_t>(j)];
    if (!col.lbla) continue;
    // the LCR target is itself a function of the page's own outlink
    // history, so only related-page columns remain for it
    if (target_kind == TargetKind::LCR && col.category == FeatureCategory::DP) {
      continue;
    }
    keep.push_back(j);
  }
  if (keep.empty()) {
    throw invalid_argument_error("matrix has no usable LBLA columns");
  }
  FeatureMatrix out;
  out.urls = matrix.urls;
  out.values.resize(matrix.n_rows(), static_cast<int>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.columns.push_back(matrix.columns[static_cast<std::size_t>(keep[i])]);
    out.values.col(static_cast<int>(i)) = matrix.values.col(keep[i]);
  }
  return out;
}

void write_feature_matrix(const FeatureMatrix& matrix, const std::string& path,
                          const std::string& file_header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  if (!file_header.empty()) {
    std::istringstream lines(file_header);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  out << "#categories";
  for (const auto& c : matrix.columns) out << '\t' << to_string(c.category);
  out << "\n#lbla";
  for (const auto& c : matrix.columns) out << '\t' << (c.lbla ? 1 : 0);
  out << "\nurl";
  for (const auto& c : matrix.columns) out << '\t' << c.name;
  out << '\n';
  char buf[40];
  for (int i = 0; i < matrix.n_rows(); ++i) {
    out << matrix.urls[static_cast<std::size_t>(i)];
    for (int j = 0; j < matrix.n_cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", matrix.values(i, j));
      out << '\t' << buf;
    }
    out << '\n';
  }
}

FeatureMatrix read_feature_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path);
  std::string line;
  std::vector<std::string> categories, lbla, names;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto tab = s.find('\t', pos);
      parts.push_back(s.substr(pos, (tab == std::string::npos ? s.size() : tab) - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    return parts;
  };
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) continue;  // free-form header
    if (line.rfind("#categories", 0) == 0) {
      categories = split(line);
    } else if (line.rfind("#lbla", 0) == 0) {
      lbla = split(line);
    } else if (line.rfind("url", 0) == 0) {
      names = split(line);
      break;
    } else {
      throw malformed_input_error("unexpected header line in " + path);
    }
  }
  if (names.empty() || categories.size() != names.size() ||
      lbla.size() != names.size()) {
    throw malformed_input_error("inconsistent feature matrix header in " + path);
  }
  FeatureMatrix matrix;
  for (std::size_t j = 1; j < names.size(); ++j) {
    matrix.columns.push_back({names[j], feature_category_from_string(categories[j]),
                              lbla[j] == "1"});
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line);
    if (parts.size() != names.size()) {
      throw malformed_input_error("bad row width in " + path);
    }
    matrix.urls.push_back(parts[0]);
    std::vector<double> row;
    for (std::size_t j = 1; j < parts.size(); ++j) row.push_back(std::stod(parts[j]));
    rows.push_back(std::move(row));
  }
  matrix.values.resize(static_cast<int>(rows.size()),
                       static_cast<int>(matrix.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      matrix.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
  }
  return matrix;
}

}  // namespace linkpred
