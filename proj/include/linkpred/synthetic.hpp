#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "linkpred/snapshot.hpp"

namespace linkpred {

// Evolving crawl-series generator with known per-page link-creation rates.
// Pages live on sites (one topic per site); internal link targets stay on
// the page's own site, so topic-coupled rates make related-page history
// genuinely informative.
struct GeneratorConfig {
  int n_pages = 1000;
  int n_crawls = 10;
  int n_topics = 8;
  int pages_per_site = 50;

  // rate mixture: point mass at zero + log-normal body
  double zero_inflation_internal = 0.70;
  double zero_inflation_external = 0.92;
  double rate_mu = 0.5;
  double rate_sigma = 1.2;

  // fixed per-page rates when true; two-state (quiet/burst) regime
  // switching when false
  bool persistent_rates = true;
  double burst_stay_prob = 0.8;
  double burst_start_prob = 0.3;

  // pages of one topic share a rate multiplier and a zero-inflation tilt
  bool topic_coupled = true;
  double coupling_sigma = 1.3;

  double content_change_prob = 0.3;  // independent of link churn
  double link_removal_prob = 0.02;
  int initial_outlinks = 6;
  double semantic_noise = 0.45;

  std::uint64_t seed = 1;
};

struct GroundTruth {
  std::vector<int> topic;            // per page
  std::vector<int> site;             // per page
  std::vector<int> trusted;          // seed pages (site roots)
  Eigen::MatrixXd lambda_internal;   // (n_crawls-1) x pages, per-interval rates
  Eigen::MatrixXd lambda_external;

  Eigen::VectorXd mean_lambda_internal() const {
    return lambda_internal.colwise().mean().transpose();
  }
  Eigen::VectorXd mean_lambda_external() const {
    return lambda_external.colwise().mean().transpose();
  }
};

std::pair<CrawlSeries, GroundTruth> generate(const GeneratorConfig& config);

// Sidecar (url, topic, lambda_int, lambda_ext) next to the emitted series.
void write_ground_truth(const GroundTruth& truth, const CrawlSeries& series,
                        const std::string& path);

// Empirical summaries mirroring the source-data statistics: per-interval
// mean/std of new outlinks, CCDF samples, group-transition counts and LCR
// histograms.
struct CalibrationReport {
  Eigen::VectorXd mean_internal, std_internal;  // per interval
  Eigen::VectorXd mean_external, std_external;
  // group transitions between consecutive intervals; internal groups are
  // {0}, {1-2}, {3-10}, {>10}, external groups {0}, {1}, {>1}
  std::vector<Eigen::MatrixXd> internal_transitions;
  std::vector<Eigen::MatrixXd> external_transitions;
  Eigen::MatrixXd lcr_histogram;  // 10 bins x 2 scopes, page counts
  // fraction of pages with count >= {1,2,3,5,10,20,50,100}, last interval
  Eigen::MatrixXd ccdf;  // 8 x 2

  std::string text() const;
};

CalibrationReport calibration_report(const CrawlSeries& series);

int internal_count_group(double count);  // 0..3
int external_count_group(double count);  // 0..2

}  // namespace linkpred
