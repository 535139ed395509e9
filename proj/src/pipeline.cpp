#include "linkpred/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "linkpred/errors.hpp"
#include "linkpred/ingestion.hpp"
#include "linkpred/rng.hpp"
#include "linkpred/sha256.hpp"

namespace linkpred {

namespace {

using json = nlohmann::ordered_json;

json generator_to_json_obj(const GeneratorConfig& c) {
  return json{{"n_pages", c.n_pages},
              {"n_crawls", c.n_crawls},
              {"n_topics", c.n_topics},
              {"pages_per_site", c.pages_per_site},
              {"zero_inflation_internal", c.zero_inflation_internal},
              {"zero_inflation_external", c.zero_inflation_external},
              {"rate_mu", c.rate_mu},
              {"rate_sigma", c.rate_sigma},
              {"persistent_rates", c.persistent_rates},
              {"burst_stay_prob", c.burst_stay_prob},
              {"burst_start_prob", c.burst_start_prob},
              {"topic_coupled", c.topic_coupled},
              {"coupling_sigma", c.coupling_sigma},
              {"content_change_prob", c.content_change_prob},
              {"link_removal_prob", c.link_removal_prob},
              {"initial_outlinks", c.initial_outlinks},
              {"semantic_noise", c.semantic_noise},
              {"seed", c.seed}};
}

GeneratorConfig generator_from_json_obj(const json& doc) {
  GeneratorConfig c;
  c.n_pages = doc.value("n_pages", c.n_pages);
  c.n_crawls = doc.value("n_crawls", c.n_crawls);
  c.n_topics = doc.value("n_topics", c.n_topics);
  c.pages_per_site = doc.value("pages_per_site", c.pages_per_site);
  c.zero_inflation_internal =
      doc.value("zero_inflation_internal", c.zero_inflation_internal);
  c.zero_inflation_external =
      doc.value("zero_inflation_external", c.zero_inflation_external);
  c.rate_mu = doc.value("rate_mu", c.rate_mu);
  c.rate_sigma = doc.value("rate_sigma", c.rate_sigma);
  c.persistent_rates = doc.value("persistent_rates", c.persistent_rates);
  c.burst_stay_prob = doc.value("burst_stay_prob", c.burst_stay_prob);
  c.burst_start_prob = doc.value("burst_start_prob", c.burst_start_prob);
  c.topic_coupled = doc.value("topic_coupled", c.topic_coupled);
  c.coupling_sigma = doc.value("coupling_sigma", c.coupling_sigma);
  c.content_change_prob = doc.value("content_change_prob", c.content_change_prob);
  c.link_removal_prob = doc.value("link_removal_prob", c.link_removal_prob);
  c.initial_outlinks = doc.value("initial_outlinks", c.initial_outlinks);
  c.semantic_noise = doc.value("semantic_noise", c.semantic_noise);
  c.seed = doc.value("seed", c.seed);
  return c;
}

std::string scope_to_string(LinkScope scope) {
  return scope == LinkScope::Internal ? "internal" : "external";
}

LinkScope scope_from_string(const std::string& s) {
  if (s == "internal") return LinkScope::Internal;
  if (s == "external") return LinkScope::External;
  throw invalid_argument_error("unknown scope: " + s);
}

}  // namespace

const char* to_string(LearnerFamily family) {
  switch (family) {
    case LearnerFamily::ExtraTrees: return "extra_trees";
    case LearnerFamily::HistGB: return "hist_gb";
    case LearnerFamily::NGBoost: return "ngboost";
  }
  return "?";
}

LearnerFamily learner_family_from_string(const std::string& s) {
  if (s == "extra_trees") return LearnerFamily::ExtraTrees;
  if (s == "hist_gb") return LearnerFamily::HistGB;
  if (s == "ngboost") return LearnerFamily::NGBoost;
  throw invalid_argument_error("unknown learner family: " + s);
}

std::string experiment_to_json(const ExperimentConfig& c) {
  json doc;
  doc["input_files"] = c.input_files;
  if (c.generator) doc["generator"] = generator_to_json_obj(*c.generator);
  doc["target"] = to_string(c.target);
  doc["scope"] = scope_to_string(c.scope);
  doc["features"] = {{"sp", c.features.use_sp},
                     {"sn", c.features.use_sn},
                     {"dp", c.features.use_dp},
                     {"dn", c.features.use_dn},
                     {"semantic", c.features.include_semantic},
                     {"pagerank", c.features.include_pagerank},
                     {"history", c.features.history}};
  doc["lbla"] = c.lbla;
  doc["learner"] = to_string(c.learner);
  doc["params"] = {{"n_estimators", c.params.n_estimators},
                   {"learning_rate", c.params.learning_rate},
                   {"min_samples_leaf", c.params.min_samples_leaf},
                   {"max_features", c.params.max_features},
                   {"max_bins", c.params.max_bins},
                   {"max_depth", c.params.max_depth}};
  doc["grid"] = {{"n_estimators", c.grid.n_estimators},
                 {"learning_rates", c.grid.learning_rates},
                 {"min_samples_leaf", c.grid.min_samples_leaf}};
  doc["tune"] = c.tune_params;
  doc["repetitions"] = c.repetitions;
  doc["related_k"] = c.related_k;
  doc["related_crawl"] = c.related_crawl;
  doc["target_interval"] = c.target_interval;
  doc["n_realizations"] = c.n_realizations;
  doc["baselines"] = c.include_baselines;
  doc["baselines_include_target_interval"] = c.baselines_include_target_interval;
  doc["require_semantic"] = c.require_semantic;
  doc["seed"] = c.seed;
  doc["threads"] = c.threads;
  return doc.dump(2);
}

ExperimentConfig experiment_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw invalid_argument_error(std::string("bad experiment config: ") + e.what());
  }
  ExperimentConfig c;
  c.input_files = doc.value("input_files", c.input_files);
  if (doc.contains("generator")) {
    c.generator = generator_from_json_obj(doc["generator"]);
  }
  c.target = target_kind_from_string(doc.value("target", std::string("nnl")));
  c.scope = scope_from_string(doc.value("scope", std::string("internal")));
  if (doc.contains("features")) {
    const auto& f = doc["features"];
    c.features.use_sp = f.value("sp", c.features.use_sp);
    c.features.use_sn = f.value("sn", c.features.use_sn);
    c.features.use_dp = f.value("dp", c.features.use_dp);
    c.features.use_dn = f.value("dn", c.features.use_dn);
    c.features.include_semantic = f.value("semantic", c.features.include_semantic);
    c.features.include_pagerank = f.value("pagerank", c.features.include_pagerank);
    c.features.history = f.value("history", c.features.history);
  }
  c.lbla = doc.value("lbla", c.lbla);
  c.learner = learner_family_from_string(doc.value("learner", std::string("extra_trees")));
  if (doc.contains("params")) {
    const auto& p = doc["params"];
    c.params.n_estimators = p.value("n_estimators", c.params.n_estimators);
    c.params.learning_rate = p.value("learning_rate", c.params.learning_rate);
    c.params.min_samples_leaf = p.value("min_samples_leaf", c.params.min_samples_leaf);
    c.params.max_features = p.value("max_features", c.params.max_features);
    c.params.max_bins = p.value("max_bins", c.params.max_bins);
    c.params.max_depth = p.value("max_depth", c.params.max_depth);
  }
  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    c.grid.n_estimators = g.value("n_estimators", c.grid.n_estimators);
    c.grid.learning_rates = g.value("learning_rates", c.grid.learning_rates);
    c.grid.min_samples_leaf = g.value("min_samples_leaf", c.grid.min_samples_leaf);
  }
  c.tune_params = doc.value("tune", c.tune_params);
  c.repetitions = doc.value("repetitions", c.repetitions);
  c.related_k = doc.value("related_k", c.related_k);
  c.related_crawl = doc.value("related_crawl", c.related_crawl);
  c.target_interval = doc.value("target_interval", c.target_interval);
  c.n_realizations = doc.value("n_realizations", c.n_realizations);
  c.include_baselines = doc.value("baselines", c.include_baselines);
  c.baselines_include_target_interval =
      doc.value("baselines_include_target_interval",
                c.baselines_include_target_interval);
  c.require_semantic = doc.value("require_semantic", c.require_semantic);
  c.seed = doc.value("seed", c.seed);
  c.threads = doc.value("threads", c.threads);
  return c;
}

std::string generator_to_json(const GeneratorConfig& config) {
  return generator_to_json_obj(config).dump(2);
}

GeneratorConfig generator_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw invalid_argument_error(std::string("bad generator config: ") + e.what());
  }
  return generator_from_json_obj(doc);
}

std::string config_hash(const ExperimentConfig& config) {
  return sha256_hex(experiment_to_json(config));
}

std::string output_header(const std::string& hash, std::uint64_t seed) {
  std::ostringstream out;
  out << "# linkpred " << kToolVersion << "\n# config-hash " << hash
      << "\n# seed " << seed << "\n";
  return out.str();
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& matrix,
                            const std::vector<int>& ids) {
  Eigen::MatrixXd out(static_cast<int>(ids.size()), matrix.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.row(static_cast<int>(i)) = matrix.row(ids[i]);
  }
  return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& values,
                            const std::vector<int>& ids) {
  Eigen::VectorXd out(static_cast<int>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out(static_cast<int>(i)) = values(ids[i]);
  }
  return out;
}

std::pair<CrawlSeries, std::optional<GroundTruth>> load_experiment_data(
    const ExperimentConfig& config) {
  if (!config.input_files.empty()) {
    std::vector<SnapshotFile> files;
    for (std::size_t i = 0; i < config.input_files.size(); ++i) {
      files.push_back({config.input_files[i], static_cast<int>(i) + 1});
    }
    LoadOptions options;
    options.require_semantic = config.require_semantic;
    auto [series, report] = load_crawl_series(files, options);
    return {std::move(series), std::nullopt};
  }
  if (!config.generator) {
    throw invalid_argument_error("config names neither input files nor a generator");
  }
  auto [series, truth] = generate(*config.generator);
  return {std::move(series), std::move(truth)};
}

namespace {

std::string method_tag(const ExperimentConfig& config) {
  std::string tag;
  switch (config.target) {
    case TargetKind::LCR: tag = "LCR"; break;
    case TargetKind::NL: tag = "NL"; break;
    case TargetKind::NNL: tag = "NNL"; break;
  }
  switch (config.learner) {
    case LearnerFamily::ExtraTrees: tag += "-ET"; break;
    case LearnerFamily::HistGB: tag += "-HGB"; break;
    case LearnerFamily::NGBoost: tag += "-NGB"; break;
  }
  if (config.lbla) tag += "_LBLA";
  return tag;
}

EnsembleModel fit_model(const ExperimentConfig& config, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& y, const HyperParams& params,
                        const std::vector<std::string>& names) {
  const Task task =
      config.target == TargetKind::NL ? Task::Classification : Task::Regression;
  switch (config.learner) {
    case LearnerFamily::ExtraTrees:
      return fit_extra_trees(x, y, params, task, names, config.threads);
    case LearnerFamily::HistGB:
      return fit_hist_gb(x, y, params, task, names);
    case LearnerFamily::NGBoost:
      if (config.target != TargetKind::NNL) {
        throw invalid_argument_error("the Poisson booster only fits NNL counts");
      }
      return fit_ngboost_poisson(x, y, params, names);
  }
  throw invalid_argument_error("unknown learner family");
}

ModelKind model_kind_for(const ExperimentConfig& config) {
  const bool classification = config.target == TargetKind::NL;
  switch (config.learner) {
    case LearnerFamily::ExtraTrees:
      return classification ? ModelKind::ExtraTreesClassifier
                            : ModelKind::ExtraTreesRegressor;
    case LearnerFamily::HistGB:
      return classification ? ModelKind::HistGBClassifier
                            : ModelKind::HistGBRegressor;
    case LearnerFamily::NGBoost:
      return ModelKind::NGBoostPoisson;
  }
  throw invalid_argument_error("unknown learner family");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const CrawlSeries& series) {
  const int m = series.n_pages();
  const int t = config.target_interval < 0 ? series.interval_count() - 1
                                           : config.target_interval;
  if (t < 0 || t >= series.interval_count()) {
    throw invalid_argument_error("target interval out of range");
  }

  FeatureSpec spec = config.features;
  spec.scope = config.scope;
  const NewOutlinkCounts counts = count_new_outlinks(series);

  const bool need_related = spec.use_sn || spec.use_dn;
  RelatedPagesIndex index;
  if (need_related) {
    Eigen::MatrixXd vectors(m, kSemanticDim);
    for (int p = 0; p < m; ++p) {
      const auto& v = series.snapshot(config.related_crawl, p).semantic_vector;
      if (!v) {
        throw missing_data_error("semantic vectors required for related pages");
      }
      vectors.row(p) = v->transpose();
    }
    index = build_index(vectors, config.related_k, config.related_crawl,
                        config.threads);
  }

  // ground-truth targets for the ranking comparison
  const TargetVector truth_lcr =
      compute_target(series, counts, TargetKind::LCR, config.scope, t);
  const TargetVector truth_nl =
      compute_target(series, counts, TargetKind::NL, config.scope, t);
  const TargetVector truth_nnl =
      compute_target(series, counts, TargetKind::NNL, config.scope, t);
  const TargetVector& truth_main = config.target == TargetKind::LCR ? truth_lcr
                                   : config.target == TargetKind::NL ? truth_nl
                                                                     : truth_nnl;

  ExperimentResult result;
  for (const auto& page : series.pages()) result.urls.push_back(page.url);
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = split_seed(config.seed, 1000 + rep);
    const SplitPlan split = make_split(m, rep_seed);
    const std::vector<int> train_ids = split.full_train();

    SemanticReducer reducer;
    const SemanticReducer* reducer_ptr = nullptr;
    if (spec.use_sp && spec.include_semantic) {
      Eigen::MatrixXd train_vectors(static_cast<int>(train_ids.size()), kSemanticDim);
      for (std::size_t i = 0; i < train_ids.size(); ++i) {
        const auto& v = series.snapshot(t, train_ids[i]).semantic_vector;
        if (!v) throw missing_data_error("semantic vectors required");
        train_vectors.row(static_cast<int>(i)) = v->transpose();
      }
      reducer = fit_semantic_reducer(train_vectors, 20);
      reducer_ptr = &reducer;
    }

    FeatureMatrix matrix =
        assemble(series, spec, counts, need_related ? &index : nullptr, t, reducer_ptr);
    if (config.lbla) matrix = lbla_subset(matrix, config.target);
    std::vector<std::string> names;
    for (const auto& c : matrix.columns) names.push_back(c.name);

    const Eigen::VectorXd& y = truth_main.values;
    HyperParams params = config.params;
    params.seed = split_seed(rep_seed, 7);
    if (config.tune_params) {
      params = tune(model_kind_for(config), config.grid,
                    select_rows(matrix.values, split.core_train),
                    select_rows(y, split.core_train),
                    select_rows(matrix.values, split.dev), select_rows(y, split.dev),
                    names, params, config.threads);
    }
    const EnsembleModel model =
        fit_model(config, select_rows(matrix.values, train_ids),
                  select_rows(y, train_ids), params, names);

    const Eigen::MatrixXd x_test = select_rows(matrix.values, split.test);
    const Eigen::VectorXd y_test = select_rows(y, split.test);

    RepetitionResult rep_result;
    rep_result.repetition = rep;
    rep_result.tuned = params;
    rep_result.classification = config.target == TargetKind::NL;
    if (rep_result.classification) {
      rep_result.classifier =
          classification_scores(y_test, predict_label(model, x_test, names));
    } else {
      rep_result.regression =
          regression_scores(y_test, predict_value(model, x_test, names));
    }

    // rankings over the test pages
    std::vector<RankingResult> rankings;
    Eigen::VectorXd model_scores = Eigen::VectorXd::Zero(m);
    const Eigen::VectorXd test_values = predict_value(model, x_test, names);
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      model_scores(split.test[i]) = test_values(static_cast<int>(i));
    }
    if (rep_result.classification) {
      Eigen::VectorXd label_scores = Eigen::VectorXd::Zero(m);
      const Eigen::VectorXd test_labels = predict_label(model, x_test, names);
      for (std::size_t i = 0; i < split.test.size(); ++i) {
        label_scores(split.test[i]) = test_labels(static_cast<int>(i));
      }
      rankings.push_back(make_ranking(method_tag(config), label_scores, split.test));
      rankings.push_back(
          make_ranking("P" + method_tag(config), model_scores, split.test));
    } else {
      rankings.push_back(make_ranking(method_tag(config), model_scores, split.test));
    }
    if (config.include_baselines) {
      if (t >= 2) {
        rankings.push_back(make_ranking(
            "NNL-Av",
            baseline_scores(series, counts, config.scope, BaselineKind::NNLAv, t,
                            config.baselines_include_target_interval),
            split.test));
      }
      if (t >= 1) {
        rankings.push_back(make_ranking(
            "NNL-Pr",
            baseline_scores(series, counts, config.scope, BaselineKind::NNLPr, t,
                            config.baselines_include_target_interval),
            split.test));
        rankings.push_back(make_ranking(
            "CCR",
            baseline_scores(series, counts, config.scope, BaselineKind::CCR, t,
                            config.baselines_include_target_interval),
            split.test));
      }
    }

    const std::vector<NamedTarget> targets = {
        {"LCR", select_rows(truth_lcr.values, split.test)},
        {"NL", select_rows(truth_nl.values, split.test)},
        {"NNL", select_rows(truth_nnl.values, split.test)}};
    rep_result.rankings = evaluate_rankings(rankings, split.test, targets,
                                            config.n_realizations, rep_seed);

    if (rep == config.repetitions - 1) {
      result.model = model;
      result.last_rankings = rankings;
    }
    result.repetitions.push_back(std::move(rep_result));
  }
  return result;
}

void write_experiment_outputs(const ExperimentConfig& config,
                              const ExperimentResult& result,
                              const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const std::string hash = config_hash(config);
  const std::string header = output_header(hash, config.seed);

  {
    std::ofstream out(fs::path(directory) / "experiment_config.json",
                      std::ios::binary);
    out << experiment_to_json(config) << '\n';
  }
  {
    std::ofstream out(fs::path(directory) / "metrics.tsv", std::ios::binary);
    out << header << "repetition\tmetric\tvalue\n";
    double sums[4] = {0, 0, 0, 0};
    const char* reg_names[3] = {"r2", "mae", "medae"};
    const char* cls_names[4] = {"precision", "recall", "f1", "balanced_accuracy"};
    for (const auto& rep : result.repetitions) {
      if (rep.classification) {
        const double v[4] = {rep.classifier.precision, rep.classifier.recall,
                             rep.classifier.f1, rep.classifier.balanced_accuracy};
        for (int i = 0; i < 4; ++i) {
          out << rep.repetition << '\t' << cls_names[i] << '\t' << v[i] << '\n';
          sums[i] += v[i];
        }
      } else {
        const double v[3] = {rep.regression.r2, rep.regression.mae,
                             rep.regression.medae};
        for (int i = 0; i < 3; ++i) {
          out << rep.repetition << '\t' << reg_names[i] << '\t' << v[i] << '\n';
          sums[i] += v[i];
        }
      }
    }
    const bool cls = !result.repetitions.empty() &&
                     result.repetitions.front().classification;
    const int n_metrics = cls ? 4 : 3;
    for (int i = 0; i < n_metrics; ++i) {
      out << "mean\t" << (cls ? cls_names[i] : reg_names[i]) << '\t'
          << sums[i] / static_cast<double>(result.repetitions.size()) << '\n';
    }
  }
  {
    std::ofstream rho_out(fs::path(directory) / "spearman.tsv", std::ios::binary);
    std::ofstream area_out(fs::path(directory) / "areas.tsv", std::ios::binary);
    std::ofstream curve_out(fs::path(directory) / "precision_at_k.tsv",
                            std::ios::binary);
    rho_out << header << "repetition\tmethod\ttarget\trho\n";
    area_out << header << "repetition\tmethod\ttarget\tarea\n";
    curve_out << header << "repetition\tmethod\ttarget\tk\tprecision\n";
    std::map<std::pair<std::string, std::string>, std::pair<double, double>> sums;
    for (const auto& rep : result.repetitions) {
      for (const auto& eval : rep.rankings) {
        rho_out << rep.repetition << '\t' << eval.method << '\t' << eval.target
                << '\t' << eval.rho << '\n';
        area_out << rep.repetition << '\t' << eval.method << '\t' << eval.target
                 << '\t' << eval.curve.area << '\n';
        for (int k = 1; k <= 100; ++k) {
          curve_out << rep.repetition << '\t' << eval.method << '\t' << eval.target
                    << '\t' << k << '\t' << eval.curve.precision(k - 1) << '\n';
        }
        auto& acc = sums[{eval.method, eval.target}];
        acc.first += eval.rho;
        acc.second += eval.curve.area;
      }
    }
    const double n_reps = static_cast<double>(result.repetitions.size());
    for (const auto& [key, acc] : sums) {
      rho_out << "mean\t" << key.first << '\t' << key.second << '\t'
              << acc.first / n_reps << '\n';
      area_out << "mean\t" << key.first << '\t' << key.second << '\t'
               << acc.second / n_reps << '\n';
    }
  }
  {
    // model JSON with run metadata attached (ignored by the loader)
    json doc = json::parse(model_to_json(result.model));
    doc["meta"] = {{"tool_version", kToolVersion},
                   {"config_hash", hash},
                   {"seed", config.seed}};
    std::ofstream out(fs::path(directory) / "model.json", std::ios::binary);
    out << doc.dump() << '\n';
  }
  for (const auto& ranking : result.last_rankings) {
    std::string name = ranking.method;
    std::replace(name.begin(), name.end(), '/', '_');
    std::ofstream out(fs::path(directory) / ("ranking-" + name + ".tsv"),
                      std::ios::binary);
    out << header << "url\tscore\n";
    for (std::size_t i = 0; i < ranking.pages.size(); ++i) {
      out << result.urls[static_cast<std::size_t>(ranking.pages[i])] << '\t'
          << ranking.scores(static_cast<int>(i)) << '\n';
    }
  }
}

}  // namespace linkpred
