// benthoscan: batch classification of labeled points in benthic survey
// images (kelp vs. other taxa) with per-image coverage estimation.

#include <cctype>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "benthoscan/csv.hpp"
#include "benthoscan/dataset.hpp"
#include "benthoscan/error.hpp"
#include "benthoscan/feature_store.hpp"
#include "benthoscan/hierclass.hpp"
#include "benthoscan/pipeline.hpp"
#include "benthoscan/rottnest.hpp"
#include "benthoscan/synthetic.hpp"
#include "benthoscan/util.hpp"

namespace fs = std::filesystem;
using namespace benthoscan;

namespace {

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

struct CommonOptions {
  std::string images_csv;
  std::string labels_csv;
  std::string dataset_bin;
  std::string taxonomy;

  Dataset load() const {
    if (!dataset_bin.empty()) return load_dataset(dataset_bin);
    if (images_csv.empty() || labels_csv.empty())
      raise(Errc::config_error,
            "provide either --dataset or both --images and --labels");
    return parse_manifest(images_csv, labels_csv);
  }
};

void add_dataset_flags(CLI::App* cmd, CommonOptions& opts,
                       bool taxonomy_required) {
  cmd->add_option("--images", opts.images_csv, "images.csv manifest");
  cmd->add_option("--labels", opts.labels_csv, "labels.csv manifest");
  cmd->add_option("--dataset", opts.dataset_bin,
                  "binary dataset from `benthoscan ingest`");
  auto* tax = cmd->add_option("--taxonomy", opts.taxonomy, "taxonomy JSON");
  if (taxonomy_required) tax->required();
}

fs::path default_cache(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("BENTHOSCAN_CACHE")) return env;
  return "features.bsfc";
}

// Rebuilds the kelp/non-kelp views shared by evaluate and cover.
struct TestPredictions {
  std::vector<std::string> truth;
  std::vector<std::string> predicted;
  std::vector<PointOutcome> outcomes;
  std::set<std::string> positive_codes;
};

TestPredictions predict_labels(const TrainedClassifier& classifier,
                               const TaxonomyTree& tree,
                               const std::vector<PointLabel>& labels,
                               const Samples& features,
                               const std::string& node_id) {
  TestPredictions out;
  std::set<std::string> kelp_codes = descendants(tree, node_id);
  out.outcomes.resize(labels.size());
  out.truth.reserve(labels.size());
  out.predicted.reserve(labels.size());
  bool flat = classifier.strategy.kind == Strategy::Kind::flat;
  out.positive_codes = flat ? kelp_codes : std::set<std::string>{"kelp"};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool truth_kelp = kelp_codes.count(labels[i].class_code) != 0;
    std::string truth_label =
        flat ? labels[i].class_code : (truth_kelp ? "kelp" : "non-kelp");
    std::string predicted_label;
    bool predicted_kelp;
    if (flat) {
      predicted_label = predict_flat(classifier, features[i]);
      predicted_kelp = kelp_codes.count(predicted_label) != 0;
    } else {
      predicted_kelp = predict_node_positive(classifier, features[i]);
      predicted_label = predicted_kelp ? "kelp" : "non-kelp";
    }
    out.truth.push_back(std::move(truth_label));
    out.predicted.push_back(std::move(predicted_label));
    out.outcomes[i] = {labels[i].image_id, truth_kelp, predicted_kelp};
  }
  return out;
}

std::string safe_filename(const std::string& name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

AllNodesResult train_all_nodes_run(const TaxonomyTree& tree, const Samples& x,
                                   const std::vector<PointLabel>& labels,
                                   NegativePolicy policy,
                                   const TrainConfig& cfg, int workers,
                                   const std::string& backend_id,
                                   const std::string& stamp,
                                   const std::string& out_dir) {
  AllNodesResult all = train_all_nodes(tree, x, labels, policy, cfg, workers);
  fs::create_directories(out_dir);
  for (const auto& node : all.trained) {
    LinearModel model = node.model;
    model.backend_id = backend_id;
    model.created_at = stamp;
    save_model(model, fs::path(out_dir) /
                          ("node_" + safe_filename(node.node_id) + ".json"));
  }
  return all;
}

std::vector<LinearModel> load_models(const std::string& model_arg) {
  std::vector<LinearModel> models;
  fs::path path(model_arg);
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) models.push_back(load_model(file));
  } else {
    models.push_back(load_model(path));
  }
  if (models.empty())
    raise(Errc::config_error, "no model files under " + model_arg);
  return models;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benthic survey point classification and kelp coverage"};
  app.require_subcommand(1);

  // --- ingest ---------------------------------------------------------
  CommonOptions ingest_opts;
  std::string ingest_out;
  auto* ingest_cmd =
      app.add_subcommand("ingest", "parse and validate manifests");
  add_dataset_flags(ingest_cmd, ingest_opts, /*taxonomy_required=*/true);
  ingest_cmd->add_option("--out", ingest_out, "output dataset.bin")->required();

  // --- extract --------------------------------------------------------
  CommonOptions extract_opts;
  std::string extract_backend = "stub", extract_model, extract_cache;
  int extract_workers = 1;
  std::uint64_t extract_stub_key = 0;
  auto* extract_cmd =
      app.add_subcommand("extract", "cache feature vectors for all points");
  add_dataset_flags(extract_cmd, extract_opts, /*taxonomy_required=*/false);
  extract_cmd->add_option("--backend", extract_backend, "stub|residual");
  extract_cmd->add_option("--model", extract_model, "residual model (.onnx)");
  extract_cmd->add_option("--stub-key", extract_stub_key, "stub hash key");
  extract_cmd->add_option("--out", extract_cache,
                          "feature cache (default features.bsfc or "
                          "BENTHOSCAN_CACHE)");
  extract_cmd->add_option("--workers", extract_workers, "worker threads");

  // --- train ----------------------------------------------------------
  CommonOptions train_opts;
  std::string train_strategy_name = "sibling", train_node = kKelpNodeId;
  std::string train_features, train_out, train_split, train_backend_id;
  std::vector<double> train_c_grid;
  int train_folds = 3;
  std::uint64_t train_seed = 0;
  bool train_balanced = false;
  bool train_all_nodes = false;
  int train_workers = 1;
  auto* train_cmd = app.add_subcommand("train", "train a classifier");
  add_dataset_flags(train_cmd, train_opts, /*taxonomy_required=*/true);
  train_cmd->add_option("--strategy", train_strategy_name,
                        "flat|inclusive|sibling|global");
  train_cmd->add_option("--node", train_node, "target hierarchy node");
  train_cmd->add_flag("--all-nodes", train_all_nodes,
                      "train a binary classifier for every tree node; "
                      "untrainable nodes are skipped with a reason");
  train_cmd->add_option("--features", train_features, "feature cache")
      ->required();
  train_cmd->add_option("--backend-id", train_backend_id,
                        "backend id in the cache (default: sole id present)");
  train_cmd->add_option("--split", train_split,
                        "train on the train side of this split "
                        "(location:F:SEED or years:../..)");
  train_cmd->add_option("--c-grid", train_c_grid, "C grid for CV");
  train_cmd->add_option("--folds", train_folds, "CV folds");
  train_cmd->add_option("--seed", train_seed, "RNG seed");
  train_cmd->add_flag("--balanced", train_balanced,
                      "inverse-frequency class weighting");
  train_cmd->add_option("--workers", train_workers, "worker threads");
  train_cmd->add_option("--out", train_out, "model file (local binary) or dir (flat)")
      ->required();

  // --- evaluate -------------------------------------------------------
  CommonOptions eval_opts;
  std::string eval_model, eval_features, eval_split, eval_out = ".",
              eval_node = kKelpNodeId, eval_backend_id, eval_mode = "auto";
  auto* eval_cmd =
      app.add_subcommand("evaluate", "score a classifier on a test split");
  add_dataset_flags(eval_cmd, eval_opts, /*taxonomy_required=*/true);
  eval_cmd->add_option("--model", eval_model, "model file or directory")
      ->required();
  eval_cmd->add_option("--features", eval_features, "feature cache")
      ->required();
  eval_cmd->add_option("--backend-id", eval_backend_id, "cache backend id");
  eval_cmd->add_option("--split", eval_split,
                       "evaluate on the test side of this split");
  eval_cmd->add_option("--node", eval_node, "kelp node for the binary view");
  eval_cmd->add_option("--out", eval_out, "output directory");

  // --- cover ----------------------------------------------------------
  CommonOptions cover_opts;
  std::string cover_model, cover_features, cover_split, cover_out = ".",
              cover_node = kKelpNodeId, cover_backend_id, cover_svg;
  auto* cover_cmd =
      app.add_subcommand("cover", "estimate per-image kelp coverage");
  add_dataset_flags(cover_cmd, cover_opts, /*taxonomy_required=*/true);
  cover_cmd->add_option("--model", cover_model, "model file or directory")
      ->required();
  cover_cmd->add_option("--features", cover_features, "feature cache")
      ->required();
  cover_cmd->add_option("--backend-id", cover_backend_id, "cache backend id");
  cover_cmd->add_option("--split", cover_split,
                        "cover the test side of this split");
  cover_cmd->add_option("--node", cover_node, "kelp node");
  cover_cmd->add_option("--svg", cover_svg, "also render scatter SVG");
  cover_cmd->add_option("--out", cover_out, "output directory");

  // --- report ---------------------------------------------------------
  std::vector<std::string> report_metrics;
  std::string report_coverage, report_out = ".";
  auto* report_cmd = app.add_subcommand(
      "report", "merge metric and coverage outputs into summary tables");
  report_cmd->add_option("--metrics", report_metrics, "report.json files")
      ->required();
  report_cmd->add_option("--coverage", report_coverage, "coverage.csv");
  report_cmd->add_option("--out", report_out, "output directory");

  // --- run ------------------------------------------------------------
  RunConfig run_config;
  std::string run_images, run_labels, run_taxonomy, run_model, run_out,
      run_cache;
  std::vector<double> run_c_grid;
  bool run_balanced = false;
  auto* run_cmd = app.add_subcommand("run", "full pipeline");
  run_cmd->add_option("--images", run_images, "images.csv")->required();
  run_cmd->add_option("--labels", run_labels, "labels.csv")->required();
  run_cmd->add_option("--taxonomy", run_taxonomy, "taxonomy JSON")->required();
  run_cmd->add_option("--model", run_model, "residual model (.onnx)");
  run_cmd->add_option("--backend", run_config.backend, "stub|residual");
  run_cmd->add_option("--stub-key", run_config.stub_key, "stub hash key");
  run_cmd->add_option("--strategy", run_config.strategy,
                      "flat|inclusive|sibling|global");
  run_cmd->add_option("--node", run_config.node_id, "target hierarchy node");
  run_cmd->add_option("--split", run_config.split,
                      "location:F:SEED or years:../..");
  run_cmd->add_option("--c-grid", run_c_grid, "C grid for CV");
  run_cmd->add_option("--folds", run_config.train.folds, "CV folds");
  run_cmd->add_option("--seed", run_config.train.seed, "RNG seed");
  run_cmd->add_flag("--balanced", run_balanced,
                    "inverse-frequency class weighting");
  run_cmd->add_option("--workers", run_config.workers, "worker threads");
  run_cmd->add_option("--cache", run_cache, "feature cache path");
  run_cmd->add_option("--out", run_out, "output directory")->required();

  // --- synth ----------------------------------------------------------
  SyntheticOptions synth_opts;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand(
      "synth", "write a deterministic synthetic demo dataset");
  synth_cmd->add_option("--images", synth_opts.images, "image count");
  synth_cmd->add_option("--seed", synth_opts.seed, "generator seed");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest_cmd) {
      Dataset dataset = ingest_opts.load();
      validate_codes(dataset, load_taxonomy(ingest_opts.taxonomy));
      save_dataset(dataset, ingest_out);
      DatasetSummary summary = summarize(dataset.labels);
      std::printf("ingested %zu images, %zu points, %zu classes -> %s\n",
                  dataset.images.size(), dataset.labels.size(),
                  summary.per_class.size(), ingest_out.c_str());
      return 0;
    }

    if (*extract_cmd) {
      Dataset dataset = extract_opts.load();
      if (!extract_opts.taxonomy.empty())
        validate_codes(dataset, load_taxonomy(extract_opts.taxonomy));
      RunConfig backend_config;
      backend_config.backend = extract_backend;
      backend_config.model_path = extract_model;
      backend_config.stub_key = extract_stub_key;
      auto backend = make_backend(backend_config);
      fs::path cache_path = default_cache(extract_cache);
      FeatureStore store = FeatureStore::open(cache_path, kFeatureDim);
      fs::path root = extract_opts.images_csv.empty()
                          ? fs::path(extract_opts.dataset_bin).parent_path()
                          : fs::path(extract_opts.images_csv).parent_path();
      std::size_t added =
          cache_features(dataset, root, *backend, store, extract_workers);
      std::printf("cached %zu new vectors (%zu total) -> %s\n", added,
                  store.size(), cache_path.string().c_str());
      return 0;
    }

    auto make_train_config = [&](const std::vector<double>& grid, int folds,
                                 std::uint64_t seed, bool balanced) {
      TrainConfig cfg;
      if (!grid.empty()) cfg.c_grid = grid;
      cfg.folds = folds;
      cfg.seed = seed;
      cfg.weighting = balanced ? ClassWeighting::inverse_frequency
                               : ClassWeighting::none;
      return cfg;
    };

    auto sole_backend_id = [](const FeatureStore& store,
                              const std::string& requested) -> std::string {
      if (!requested.empty()) return requested;
      std::set<std::string> ids;
      for (const auto& key : store.keys()) ids.insert(key.backend_id);
      if (ids.size() != 1)
        raise(Errc::config_error,
              "cache holds " + std::to_string(ids.size()) +
                  " backend ids; pass --backend-id");
      return *ids.begin();
    };

    if (*train_cmd) {
      Dataset dataset = train_opts.load();
      TaxonomyTree tree = load_taxonomy(train_opts.taxonomy);
      validate_codes(dataset, tree);
      std::vector<PointLabel> labels = dataset.labels;
      if (!train_split.empty())
        labels = split(dataset, parse_split_spec(train_split)).train.labels;

      FeatureStore store = FeatureStore::open(train_features, kFeatureDim);
      std::string backend_id = sole_backend_id(store, train_backend_id);
      Samples x = gather_features(labels, store, backend_id);
      TrainConfig cfg = make_train_config(train_c_grid, train_folds,
                                          train_seed, train_balanced);
      std::string stamp = utc_timestamp();

      if (train_all_nodes) {
        Strategy policy_probe = parse_strategy(train_strategy_name, train_node);
        if (policy_probe.kind != Strategy::Kind::local_binary)
          raise(Errc::config_error,
                "--all-nodes needs --strategy inclusive or sibling");
        AllNodesResult all = train_all_nodes_run(tree, x, labels,
                                                 policy_probe.policy, cfg,
                                                 train_workers, backend_id,
                                                 stamp, train_out);
        for (const auto& [node_id, reason] : all.skipped)
          std::printf("skipped node %s: %s\n", node_id.c_str(),
                      reason.c_str());
        std::printf("trained %zu node classifiers (%zu skipped) -> %s\n",
                    all.trained.size(), all.skipped.size(),
                    train_out.c_str());
        return 0;
      }

      Strategy strategy = parse_strategy(train_strategy_name, train_node);
      TrainedClassifier classifier =
          train_strategy(strategy, tree, x, labels, cfg, train_workers);
      if (strategy.kind == Strategy::Kind::flat) {
        fs::create_directories(train_out);
        for (auto model : classifier.flat_models) {
          model.backend_id = backend_id;
          model.created_at = stamp;
          save_model(model, fs::path(train_out) /
                                (model.positive_label + ".json"));
        }
        std::printf("trained %zu one-vs-all models (C=%g) -> %s\n",
                    classifier.flat_models.size(), classifier.chosen_c,
                    train_out.c_str());
      } else {
        LinearModel model = classifier.node->model;
        model.backend_id = backend_id;
        model.created_at = stamp;
        save_model(model, train_out);
        std::printf("trained node %s (%s, C=%g) -> %s\n", train_node.c_str(),
                    train_strategy_name.c_str(), classifier.chosen_c,
                    train_out.c_str());
      }
      return 0;
    }

    auto classifier_from_files = [&](const std::string& model_arg,
                                     const TaxonomyTree& tree,
                                     const std::string& node_id)
        -> TrainedClassifier {
      TrainedClassifier classifier;
      std::vector<LinearModel> models = load_models(model_arg);
      if (models.size() == 1 && fs::is_regular_file(model_arg) &&
          tree.has_node(models[0].positive_label)) {
        classifier.strategy = Strategy::local_binary(
            NegativePolicy::inclusive, models[0].positive_label);
        NodeClassifier node;
        node.node_id = models[0].positive_label;
        node.model = std::move(models[0]);
        classifier.node = std::move(node);
      } else {
        classifier.strategy = Strategy::flat();
        classifier.flat_models = std::move(models);
      }
      (void)node_id;
      return classifier;
    };

    if (*eval_cmd) {
      Dataset dataset = eval_opts.load();
      TaxonomyTree tree = load_taxonomy(eval_opts.taxonomy);
      validate_codes(dataset, tree);
      std::vector<PointLabel> labels = dataset.labels;
      if (!eval_split.empty())
        labels = split(dataset, parse_split_spec(eval_split)).test.labels;
      if (labels.empty()) raise(Errc::empty_test_set, "no test points");

      FeatureStore store = FeatureStore::open(eval_features, kFeatureDim);
      std::string backend_id = sole_backend_id(store, eval_backend_id);
      Samples x = gather_features(labels, store, backend_id);
      TrainedClassifier classifier =
          classifier_from_files(eval_model, tree, eval_node);
      TestPredictions preds =
          predict_labels(classifier, tree, labels, x, eval_node);
      MetricsReport metrics =
          evaluate(preds.predicted, preds.truth, {}, preds.positive_codes);

      fs::create_directories(eval_out);
      std::string method = classifier.strategy.kind == Strategy::Kind::flat
                               ? "Flat"
                               : "Node " + classifier.node->node_id;
      RunConfig echo;
      echo.node_id = eval_node;
      write_file_bytes((fs::path(eval_out) / "report.json").string(),
                       metrics_report_json(metrics, method, 0.0, echo));
      write_file_bytes((fs::path(eval_out) / "report.csv").string(),
                       report_csv_header() + report_csv_row(method, metrics));
      std::printf("accuracy %.4f mean_f1 %.4f kelpP %.4f kelpR %.4f -> %s\n",
                  metrics.accuracy, metrics.mean_f1, metrics.kelp_precision,
                  metrics.kelp_recall, eval_out.c_str());
      return 0;
    }

    if (*cover_cmd) {
      Dataset dataset = cover_opts.load();
      TaxonomyTree tree = load_taxonomy(cover_opts.taxonomy);
      validate_codes(dataset, tree);
      std::vector<SurveyImage> images = dataset.images;
      std::vector<PointLabel> labels = dataset.labels;
      if (!cover_split.empty()) {
        Split parts = split(dataset, parse_split_spec(cover_split));
        images = parts.test.images;
        labels = parts.test.labels;
      }
      if (labels.empty()) raise(Errc::empty_test_set, "no test points");

      FeatureStore store = FeatureStore::open(cover_features, kFeatureDim);
      std::string backend_id = sole_backend_id(store, cover_backend_id);
      Samples x = gather_features(labels, store, backend_id);
      TrainedClassifier classifier =
          classifier_from_files(cover_model, tree, cover_node);
      TestPredictions preds =
          predict_labels(classifier, tree, labels, x, cover_node);

      std::vector<CoverageRecord> records =
          estimate_cover(preds.outcomes, images);
      fs::create_directories(cover_out);
      write_file_bytes((fs::path(cover_out) / "coverage.csv").string(),
                       coverage_to_csv(records));
      RegressionFit fit = fit_ols(records);
      write_file_bytes((fs::path(cover_out) / "fit.json").string(),
                       fit_to_json(fit));
      if (!cover_svg.empty())
        write_file_bytes(cover_svg, scatter_svg(records, fit, "coverage"));
      std::printf("%zu records, slope %.4f intercept %.4f R2 %.4f -> %s\n",
                  records.size(), fit.slope, fit.intercept, fit.r_squared,
                  cover_out.c_str());
      return 0;
    }

    if (*report_cmd) {
      fs::create_directories(report_out);
      std::vector<fs::path> metric_paths(report_metrics.begin(),
                                         report_metrics.end());
      std::optional<fs::path> coverage_path;
      if (!report_coverage.empty()) coverage_path = report_coverage;
      write_summary(metric_paths, coverage_path, report_out);
      std::printf("summary written -> %s\n", report_out.c_str());
      return 0;
    }

    if (*run_cmd) {
      run_config.images_csv = run_images;
      run_config.labels_csv = run_labels;
      run_config.taxonomy_path = run_taxonomy;
      run_config.model_path = run_model;
      run_config.out_dir = run_out;
      run_config.cache_path = run_cache;
      if (!run_c_grid.empty()) run_config.train.c_grid = run_c_grid;
      if (run_balanced)
        run_config.train.weighting = ClassWeighting::inverse_frequency;
      PipelineResult result = run_pipeline(run_config);
      std::printf(
          "%s: accuracy %.4f mean_f1 %.4f kelpP %.4f kelpR %.4f "
          "(train %zu / test %zu points) -> %s\n",
          result.method_label.c_str(), result.metrics.accuracy,
          result.metrics.mean_f1, result.metrics.kelp_precision,
          result.metrics.kelp_recall, result.train_points, result.test_points,
          run_out.c_str());
      return 0;
    }

    if (*synth_cmd) {
      write_synthetic(synth_opts, synth_out);
      std::printf("synthetic dataset (%d images) -> %s\n", synth_opts.images,
                  synth_out.c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
