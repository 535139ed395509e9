#include "linkpred/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "linkpred/errors.hpp"
#include "linkpred/features.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/rng.hpp"
#include "linkpred/sha256.hpp"

namespace linkpred {

namespace {

std::string site_host(int site) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "https://site-%04d.example", site);
  return buf;
}

std::string page_url(int site, int page) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s/p/%d", site_host(site).c_str(), page);
  return buf;
}

Eigen::VectorXd random_unit_vector(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  return v / v.norm();
}

void validate(const GeneratorConfig& c) {
  if (c.n_pages < 2 || c.n_crawls < 2 || c.n_topics < 1 || c.pages_per_site < 2) {
    throw invalid_argument_error("generator config out of range");
  }
  if (c.zero_inflation_internal < 0 || c.zero_inflation_internal > 1 ||
      c.zero_inflation_external < 0 || c.zero_inflation_external > 1 ||
      c.content_change_prob < 0 || c.content_change_prob > 1 ||
      c.link_removal_prob < 0 || c.link_removal_prob > 1) {
    throw invalid_argument_error("generator probabilities must be in [0, 1]");
  }
  if (c.rate_sigma < 0 || c.coupling_sigma < 0 || c.semantic_noise < 0) {
    throw invalid_argument_error("generator spreads must be nonnegative");
  }
}

}  // namespace

std::pair<CrawlSeries, GroundTruth> generate(const GeneratorConfig& config) {
  validate(config);
  const int m = config.n_pages;
  const int n = config.n_crawls;
  const int n_sites = (m + config.pages_per_site - 1) / config.pages_per_site;

  GroundTruth truth;
  truth.topic.resize(static_cast<std::size_t>(m));
  truth.site.resize(static_cast<std::size_t>(m));
  truth.lambda_internal.resize(n - 1, m);
  truth.lambda_external.resize(n - 1, m);

  std::vector<std::vector<int>> site_pages(static_cast<std::size_t>(n_sites));
  for (int p = 0; p < m; ++p) {
    const int site = p / config.pages_per_site;
    truth.site[static_cast<std::size_t>(p)] = site;
    truth.topic[static_cast<std::size_t>(p)] = site % config.n_topics;
    site_pages[static_cast<std::size_t>(site)].push_back(p);
  }
  for (int s = 0; s < n_sites; ++s) {
    truth.trusted.push_back(site_pages[static_cast<std::size_t>(s)].front());
  }

  // topic-level structure
  Rng topic_rng(split_seed(config.seed, 1));
  std::vector<Eigen::VectorXd> centroids;
  for (int t = 0; t < config.n_topics; ++t) {
    centroids.push_back(random_unit_vector(topic_rng, kSemanticDim));
  }
  std::vector<double> topic_mult_int(static_cast<std::size_t>(config.n_topics), 1.0);
  std::vector<double> topic_mult_ext(static_cast<std::size_t>(config.n_topics), 1.0);
  std::vector<double> topic_tilt(static_cast<std::size_t>(config.n_topics), 0.0);
  if (config.topic_coupled) {
    for (int t = 0; t < config.n_topics; ++t) {
      topic_mult_int[static_cast<std::size_t>(t)] =
          topic_rng.lognormal(0.0, config.coupling_sigma);
      topic_mult_ext[static_cast<std::size_t>(t)] =
          topic_rng.lognormal(0.0, config.coupling_sigma);
      topic_tilt[static_cast<std::size_t>(t)] = topic_rng.uniform(-0.15, 0.15);
    }
  }

  // per-page base properties
  struct PageState {
    double base_rate_int = 0.0;
    double base_rate_ext = 0.0;
    bool burst = false;
    Eigen::VectorXd base_vector;
    std::int64_t content_size = 1;
    std::int64_t text_size = 0;
    double text_quality = 0.0;
    long revision = 0;
    std::set<std::string> links;
    long fresh_counter = 0;  // for synthetic out-of-series targets
  };
  std::vector<PageState> state(static_cast<std::size_t>(m));
  for (int p = 0; p < m; ++p) {
    Rng rng(split_seed(config.seed, 1000 + static_cast<std::uint64_t>(p)));
    auto& ps = state[static_cast<std::size_t>(p)];
    const int topic = truth.topic[static_cast<std::size_t>(p)];

    auto draw_rate = [&](double zero_inflation, double mult) {
      double zi = zero_inflation + topic_tilt[static_cast<std::size_t>(topic)];
      zi = std::min(0.98, std::max(0.02, zi));
      if (rng.uniform() < zi) return 0.0;
      return rng.lognormal(config.rate_mu, config.rate_sigma) * mult;
    };
    ps.base_rate_int = draw_rate(config.zero_inflation_internal,
                                 topic_mult_int[static_cast<std::size_t>(topic)]);
    ps.base_rate_ext = draw_rate(config.zero_inflation_external,
                                 topic_mult_ext[static_cast<std::size_t>(topic)]);
    ps.burst = rng.uniform() < config.burst_start_prob;

    Eigen::VectorXd noise(kSemanticDim);
    for (int i = 0; i < kSemanticDim; ++i) {
      noise(i) = rng.normal() / std::sqrt(static_cast<double>(kSemanticDim));
    }
    ps.base_vector = centroids[static_cast<std::size_t>(topic)] +
                     config.semantic_noise * noise;
    ps.base_vector.normalize();

    ps.content_size = 1 + static_cast<std::int64_t>(rng.lognormal(9.0, 1.0));
    ps.text_size = static_cast<std::int64_t>(0.4 * static_cast<double>(ps.content_size));
    ps.text_quality = rng.uniform(0.3, 0.95);
  }

  // initial link structure: every page links to its site root plus a few
  // same-site pages and one cross-site page
  Rng link_rng(split_seed(config.seed, 2));
  for (int p = 0; p < m; ++p) {
    auto& ps = state[static_cast<std::size_t>(p)];
    const int site = truth.site[static_cast<std::size_t>(p)];
    const auto& mates = site_pages[static_cast<std::size_t>(site)];
    const int root = mates.front();
    if (root != p) {
      ps.links.insert(page_url(site, root));
    }
    for (int i = 0; i < config.initial_outlinks; ++i) {
      const int q = mates[static_cast<std::size_t>(link_rng.below(mates.size()))];
      if (q != p) ps.links.insert(page_url(site, q));
    }
    if (n_sites > 1) {
      int other = static_cast<int>(link_rng.below(static_cast<std::uint64_t>(n_sites)));
      if (other == site) other = (other + 1) % n_sites;
      const auto& theirs = site_pages[static_cast<std::size_t>(other)];
      ps.links.insert(page_url(other, theirs[static_cast<std::size_t>(
                                          link_rng.below(theirs.size()))]));
    }
  }

  // same-topic sites, used for external targets with topic preference
  std::vector<std::vector<int>> topic_sites(static_cast<std::size_t>(config.n_topics));
  for (int s = 0; s < n_sites; ++s) {
    topic_sites[static_cast<std::size_t>(s % config.n_topics)].push_back(s);
  }
  std::vector<int> all_sites(static_cast<std::size_t>(n_sites));
  std::iota(all_sites.begin(), all_sites.end(), 0);

  const std::int64_t t0 = parse_iso8601("2024-01-01T06:00:00Z");
  const std::int64_t week = 7 * 86400;

  std::vector<std::vector<PageSnapshot>> grid(static_cast<std::size_t>(n));
  std::vector<std::int64_t> crawl_times;

  auto snapshot_page = [&](int crawl, int p) {
    const auto& ps = state[static_cast<std::size_t>(p)];
    Rng rng(split_seed(config.seed,
                       0x50000 + static_cast<std::uint64_t>(crawl) * 100000 +
                           static_cast<std::uint64_t>(p)));
    PageSnapshot snap;
    snap.url = page_url(truth.site[static_cast<std::size_t>(p)], p);
    snap.fetch_time = t0 + crawl * week + static_cast<std::int64_t>(rng.below(3600));
    snap.out_links.assign(ps.links.begin(), ps.links.end());
    snap.content_digest =
        sha256_hex(snap.url + ":" + std::to_string(ps.revision));
    snap.content_size = ps.content_size;
    snap.text_size = ps.text_size;
    snap.text_quality = ps.text_quality;
    Eigen::VectorXd jitter(kSemanticDim);
    for (int i = 0; i < kSemanticDim; ++i) {
      jitter(i) = rng.normal() / std::sqrt(static_cast<double>(kSemanticDim));
    }
    Eigen::VectorXd v = ps.base_vector + 0.02 * jitter;
    v.normalize();
    snap.semantic_vector = std::move(v);
    return snap;
  };

  for (int crawl = 0; crawl < n; ++crawl) {
    if (crawl > 0) {
      // evolve one interval: link churn, new links, content changes
      const int interval = crawl - 1;
      for (int p = 0; p < m; ++p) {
        auto& ps = state[static_cast<std::size_t>(p)];
        Rng rng(split_seed(config.seed,
                           0x900000 + static_cast<std::uint64_t>(interval) * 1000003 +
                               static_cast<std::uint64_t>(p)));
        const int site = truth.site[static_cast<std::size_t>(p)];
        const int topic = truth.topic[static_cast<std::size_t>(p)];

        if (!config.persistent_rates) {
          const bool stay = rng.uniform() < config.burst_stay_prob;
          if (!stay) ps.burst = !ps.burst;
        }
        const double gate = config.persistent_rates ? 1.0 : (ps.burst ? 1.0 : 0.0);
        const double rate_int = ps.base_rate_int * gate;
        const double rate_ext = ps.base_rate_ext * gate;
        truth.lambda_internal(interval, p) = rate_int;
        truth.lambda_external(interval, p) = rate_ext;

        // removals first so a re-added link counts as new
        if (config.link_removal_prob > 0.0 && !ps.links.empty()) {
          std::vector<std::string> keep;
          keep.reserve(ps.links.size());
          for (const auto& link : ps.links) {
            if (rng.uniform() >= config.link_removal_prob) keep.push_back(link);
          }
          ps.links = std::set<std::string>(keep.begin(), keep.end());
        }

        const auto n_int = rng.poisson(rate_int);
        const auto& mates = site_pages[static_cast<std::size_t>(site)];
        for (std::uint64_t i = 0; i < n_int; ++i) {
          // in-series same-site target when one draw finds a fresh page,
          // otherwise a synthetic new path on the same host
          const int q = mates[static_cast<std::size_t>(rng.below(mates.size()))];
          const std::string candidate = page_url(site, q);
          if (q != p && ps.links.find(candidate) == ps.links.end() &&
              rng.uniform() < 0.7) {
            ps.links.insert(candidate);
          } else {
            ps.links.insert(site_host(site) + "/new/" + std::to_string(p) + "-" +
                            std::to_string(++ps.fresh_counter));
          }
        }

        const auto n_ext = rng.poisson(rate_ext);
        for (std::uint64_t i = 0; i < n_ext; ++i) {
          if (n_sites > 1 && rng.uniform() < 0.5) {
            // prefer sites of the same topic
            const bool same_topic =
                rng.uniform() < 0.5 &&
                topic_sites[static_cast<std::size_t>(topic)].size() > 1;
            const auto& pool = same_topic
                                   ? topic_sites[static_cast<std::size_t>(topic)]
                                   : all_sites;
            int other = pool[static_cast<std::size_t>(rng.below(pool.size()))];
            if (other == site) other = (other + 1) % n_sites;
            const auto& theirs = site_pages[static_cast<std::size_t>(other)];
            ps.links.insert(page_url(
                other, theirs[static_cast<std::size_t>(rng.below(theirs.size()))]));
          } else {
            ps.links.insert("https://offsite-" + std::to_string(p) + "-" +
                            std::to_string(++ps.fresh_counter) + ".example/x");
          }
        }

        if (rng.uniform() < config.content_change_prob) {
          ++ps.revision;
          ps.content_size = std::max<std::int64_t>(
              1, ps.content_size +
                     static_cast<std::int64_t>(0.05 * ps.content_size *
                                               (rng.uniform() - 0.5)));
          ps.text_size = static_cast<std::int64_t>(0.4 * ps.content_size);
        }
      }
    }

    auto& crawl_snaps = grid[static_cast<std::size_t>(crawl)];
    crawl_snaps.reserve(static_cast<std::size_t>(m));
    std::vector<std::int64_t> times;
    for (int p = 0; p < m; ++p) {
      crawl_snaps.push_back(snapshot_page(crawl, p));
      times.push_back(crawl_snaps.back().fetch_time);
    }
    std::sort(times.begin(), times.end());
    crawl_times.push_back(times[times.size() / 2]);
  }

  std::vector<PageId> pages;
  for (int p = 0; p < m; ++p) {
    pages.push_back({page_url(truth.site[static_cast<std::size_t>(p)], p), p});
  }
  CrawlSeries series(std::move(pages), std::move(crawl_times), std::move(grid));

  // graph scores: restart from the generator's seed pages
  for (int crawl = 0; crawl < n; ++crawl) {
    const SnapshotGraph graph = build_graph(series, crawl);
    const auto counts = inlink_counts(graph);
    const ScoreVector pr = pagerank(graph);
    const ScoreVector tr = trustrank(graph, truth.trusted);
    for (int p = 0; p < m; ++p) {
      auto& snap = series.mutable_snapshot(crawl, p);
      snap.inlinks = counts[static_cast<std::size_t>(p)];
      snap.pagerank = pr.scores(p);
      snap.trustrank = tr.scores(p);
    }
  }
  return {std::move(series), std::move(truth)};
}

void write_ground_truth(const GroundTruth& truth, const CrawlSeries& series,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  out << "url\ttopic\tlambda_int\tlambda_ext\n";
  const Eigen::VectorXd li = truth.mean_lambda_internal();
  const Eigen::VectorXd le = truth.mean_lambda_external();
  char buf[40];
  for (int p = 0; p < series.n_pages(); ++p) {
    out << series.pages()[static_cast<std::size_t>(p)].url << '\t'
        << truth.topic[static_cast<std::size_t>(p)];
    std::snprintf(buf, sizeof(buf), "%.17g", li(p));
    out << '\t' << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", le(p));
    out << '\t' << buf << '\n';
  }
}

int internal_count_group(double count) {
  if (count <= 0.0) return 0;
  if (count <= 2.0) return 1;
  if (count <= 10.0) return 2;
  return 3;
}

int external_count_group(double count) {
  if (count <= 0.0) return 0;
  if (count <= 1.0) return 1;
  return 2;
}

CalibrationReport calibration_report(const CrawlSeries& series) {
  const NewOutlinkCounts counts = count_new_outlinks(series);
  const int intervals = series.interval_count();
  const int m = series.n_pages();

  CalibrationReport report;
  report.mean_internal.resize(intervals);
  report.std_internal.resize(intervals);
  report.mean_external.resize(intervals);
  report.std_external.resize(intervals);
  for (int i = 0; i < intervals; ++i) {
    const auto row_i = counts.internal.row(i);
    const auto row_e = counts.external.row(i);
    report.mean_internal(i) = row_i.mean();
    report.mean_external(i) = row_e.mean();
    report.std_internal(i) =
        std::sqrt((row_i.array() - row_i.mean()).square().sum() / m);
    report.std_external(i) =
        std::sqrt((row_e.array() - row_e.mean()).square().sum() / m);
  }

  for (int i = 0; i + 1 < intervals; ++i) {
    Eigen::MatrixXd ti = Eigen::MatrixXd::Zero(4, 4);
    Eigen::MatrixXd te = Eigen::MatrixXd::Zero(3, 3);
    for (int p = 0; p < m; ++p) {
      ti(internal_count_group(counts.internal(i, p)),
         internal_count_group(counts.internal(i + 1, p))) += 1.0;
      te(external_count_group(counts.external(i, p)),
         external_count_group(counts.external(i + 1, p))) += 1.0;
    }
    report.internal_transitions.push_back(std::move(ti));
    report.external_transitions.push_back(std::move(te));
  }

  report.lcr_histogram = Eigen::MatrixXd::Zero(10, 2);
  const IntervalRange all{0, intervals - 1};
  for (int p = 0; p < m; ++p) {
    const double lcr_i = compute_lcr(counts, p, LinkScope::Internal, all);
    const double lcr_e = compute_lcr(counts, p, LinkScope::External, all);
    report.lcr_histogram(std::min(9, static_cast<int>(lcr_i * 10.0)), 0) += 1.0;
    report.lcr_histogram(std::min(9, static_cast<int>(lcr_e * 10.0)), 1) += 1.0;
  }

  const double thresholds[8] = {1, 2, 3, 5, 10, 20, 50, 100};
  report.ccdf = Eigen::MatrixXd::Zero(8, 2);
  for (int k = 0; k < 8; ++k) {
    report.ccdf(k, 0) =
        (counts.internal.row(intervals - 1).array() >= thresholds[k]).count() /
        static_cast<double>(m);
    report.ccdf(k, 1) =
        (counts.external.row(intervals - 1).array() >= thresholds[k]).count() /
        static_cast<double>(m);
  }
  return report;
}

std::string CalibrationReport::text() const {
  std::ostringstream out;
  out << "new outlinks per interval (mean / std):\n";
  for (int i = 0; i < mean_internal.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof(line),
                  "  interval %d  internal %.2f / %.2f   external %.2f / %.2f\n",
                  i + 1, mean_internal(i), std_internal(i), mean_external(i),
                  std_external(i));
    out << line;
  }
  out << "CCDF thresholds 1,2,3,5,10,20,50,100 (last interval):\n  internal";
  for (int k = 0; k < ccdf.rows(); ++k) {
    char cell[16];
    std::snprintf(cell, sizeof(cell), " %.4f", ccdf(k, 0));
    out << cell;
  }
  out << "\n  external";
  for (int k = 0; k < ccdf.rows(); ++k) {
    char cell[16];
    std::snprintf(cell, sizeof(cell), " %.4f", ccdf(k, 1));
    out << cell;
  }
  out << "\nLCR histogram (10 bins, internal | external):\n";
  for (int b = 0; b < 10; ++b) {
    char line[64];
    std::snprintf(line, sizeof(line), "  [%.1f,%.1f)  %8.0f | %8.0f\n", b / 10.0,
                  (b + 1) / 10.0, lcr_histogram(b, 0), lcr_histogram(b, 1));
    out << line;
  }
  if (!internal_transitions.empty()) {
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(4, 4);
    for (const auto& t : internal_transitions) total += t;
    out << "internal group transitions (0 / 1-2 / 3-10 / >10), all interval pairs:\n";
    for (int r = 0; r < 4; ++r) {
      out << " ";
      for (int c = 0; c < 4; ++c) {
        char cell[16];
        std::snprintf(cell, sizeof(cell), " %8.0f", total(r, c));
        out << cell;
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace linkpred
