#include "benthoscan/pipeline.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "benthoscan/csv.hpp"
#include "benthoscan/error.hpp"
#include "benthoscan/image_io.hpp"
#include "benthoscan/residual_backend.hpp"
#include "benthoscan/rottnest.hpp"
#include "benthoscan/util.hpp"

namespace benthoscan {

namespace {

std::string weighting_name(ClassWeighting w) {
  return w == ClassWeighting::inverse_frequency ? "inverse-frequency" : "none";
}

ClassWeighting weighting_from(const std::string& name) {
  if (name == "none") return ClassWeighting::none;
  if (name == "inverse-frequency") return ClassWeighting::inverse_frequency;
  raise(Errc::config_error, "unknown class weighting " + name);
}

}  // namespace

std::string RunConfig::to_json() const {
  nlohmann::json doc;
  doc["images_csv"] = images_csv.string();
  doc["labels_csv"] = labels_csv.string();
  doc["taxonomy"] = taxonomy_path.string();
  doc["model"] = model_path.string();
  doc["out"] = out_dir.string();
  doc["cache"] = cache_path.string();
  doc["backend"] = backend;
  doc["stub_key"] = stub_key;
  doc["strategy"] = strategy;
  doc["node"] = node_id;
  doc["split"] = split;
  doc["workers"] = workers;
  doc["train"] = {
      {"c_grid", train.c_grid},
      {"folds", train.folds},
      {"tolerance", train.tolerance},
      {"max_iterations", train.max_iterations},
      {"seed", train.seed},
      {"class_weighting", weighting_name(train.weighting)},
  };
  return doc.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::config_error, std::string("invalid config JSON: ") + e.what());
  }
  RunConfig config;
  config.images_csv = doc.value("images_csv", std::string());
  config.labels_csv = doc.value("labels_csv", std::string());
  config.taxonomy_path = doc.value("taxonomy", std::string());
  config.model_path = doc.value("model", std::string());
  config.out_dir = doc.value("out", std::string());
  config.cache_path = doc.value("cache", std::string());
  config.backend = doc.value("backend", std::string("stub"));
  config.stub_key = doc.value("stub_key", std::uint64_t(0));
  config.strategy = doc.value("strategy", std::string("sibling"));
  config.node_id = doc.value("node", std::string(kKelpNodeId));
  config.split = doc.value("split", std::string("location:0.7:0"));
  config.workers = doc.value("workers", 1);
  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    config.train.c_grid = t.value("c_grid", config.train.c_grid);
    config.train.folds = t.value("folds", 3);
    config.train.tolerance = t.value("tolerance", 1e-4);
    config.train.max_iterations = t.value("max_iterations", 1000);
    config.train.seed = t.value("seed", std::uint64_t(0));
    config.train.weighting =
        weighting_from(t.value("class_weighting", std::string("none")));
  }
  return config;
}

SplitSpec parse_split_spec(const std::string& text) {
  auto fail = [&]() -> SplitSpec {
    raise(Errc::config_error,
          "bad split spec '" + text +
              "' (expected location:FRACTION:SEED or years:Y,Y/Y,Y)");
  };
  auto colon = text.find(':');
  if (colon == std::string::npos) return fail();
  std::string kind = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);

  if (kind == "location") {
    auto second = rest.find(':');
    if (second == std::string::npos) return fail();
    try {
      double fraction = std::stod(rest.substr(0, second));
      std::uint64_t seed = std::stoull(rest.substr(second + 1));
      return SplitSpec::location_fraction(fraction, seed);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      return fail();
    }
  }
  if (kind == "years") {
    auto slash = rest.find('/');
    if (slash == std::string::npos) return fail();
    auto parse_years = [&](const std::string& part) {
      std::set<int> years;
      std::size_t start = 0;
      while (start <= part.size()) {
        auto comma = part.find(',', start);
        std::string token = part.substr(
            start, comma == std::string::npos ? std::string::npos
                                              : comma - start);
        if (token.empty()) fail();
        try {
          years.insert(std::stoi(token));
        } catch (const std::exception&) {
          fail();
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return years;
    };
    return SplitSpec::by_year(parse_years(rest.substr(0, slash)),
                              parse_years(rest.substr(slash + 1)));
  }
  return fail();
}

Strategy parse_strategy(const std::string& name, const std::string& node_id) {
  if (name == "flat") return Strategy::flat();
  if (name == "inclusive")
    return Strategy::local_binary(NegativePolicy::inclusive, node_id);
  if (name == "sibling")
    return Strategy::local_binary(NegativePolicy::sibling, node_id);
  if (name == "global") return Strategy::global();
  raise(Errc::config_error, "unknown strategy " + name);
}

std::unique_ptr<FeatureBackend> make_backend(const RunConfig& config) {
  if (config.backend == "stub") return make_stub_backend(config.stub_key);
  if (config.backend == "residual") {
    if (config.model_path.empty())
      raise(Errc::backend_unavailable,
            "residual backend needs --model <file.onnx>");
    return std::make_unique<ResidualBackend>(config.model_path);
  }
  raise(Errc::config_error, "unknown backend " + config.backend);
}

std::size_t cache_features(const Dataset& dataset,
                           const std::filesystem::path& image_root,
                           const FeatureBackend& backend, FeatureStore& store,
                           int workers) {
  std::unordered_map<std::string, std::vector<const PointLabel*>> by_image;
  for (const auto& label : dataset.labels)
    by_image[label.image_id].push_back(&label);

  std::atomic<std::size_t> added{0};
  parallel_for(dataset.images.size(), workers, [&](std::size_t i) {
    const SurveyImage& meta = dataset.images[i];
    auto it = by_image.find(meta.image_id);
    if (it == by_image.end()) return;

    bool all_cached = true;
    for (const PointLabel* label : it->second) {
      if (!store.contains(
              {meta.image_id, label->x_px, label->y_px, backend.id()})) {
        all_cached = false;
        break;
      }
    }
    if (all_cached) return;

    if (meta.width_px < kPatchSize || meta.height_px < kPatchSize)
      raise(Errc::malformed_row,
            "image " + meta.image_id + " smaller than a patch");

    std::filesystem::path file(meta.file_path);
    if (file.is_relative()) file = image_root / file;
    RgbImage image = load_image(file);
    if (image.width != meta.width_px || image.height != meta.height_px)
      raise(Errc::malformed_row,
            "image " + meta.image_id + " dimensions disagree with manifest");

    RgbImage stretched = color_stretch(image).image;
    for (const PointLabel* label : it->second) {
      FeatureKey key{meta.image_id, label->x_px, label->y_px, backend.id()};
      if (store.contains(key)) continue;
      FeatureVector vec = backend.extract(extract_patch(stretched, *label));
      if (store.put(key, vec.values)) added.fetch_add(1);
    }
  });
  return added.load();
}

Samples gather_features(const std::vector<PointLabel>& labels,
                        const FeatureStore& store,
                        const std::string& backend_id) {
  Samples samples(store.dim());
  samples.reserve(labels.size());
  for (const auto& label : labels) {
    auto values =
        store.get({label.image_id, label.x_px, label.y_px, backend_id});
    if (!values)
      raise(Errc::io_error,
            "feature missing from cache for " + label.image_id + " (" +
                std::to_string(label.x_px) + "," + std::to_string(label.y_px) +
                ")");
    samples.add(*values);
  }
  return samples;
}

// ---------------------------------------------------------------------------
// Report serialization

std::string report_csv_header() {
  return "Method,Accuracy (%),Mean f1-score,Precision of Kelps (%),"
         "Recall of Kelps (%)\n";
}

std::string report_csv_row(const std::string& method_label,
                           const MetricsReport& metrics) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%.1f,%.2f,%.1f,%.1f\n",
                method_label.c_str(), 100.0 * metrics.accuracy,
                metrics.mean_f1, 100.0 * metrics.kelp_precision,
                100.0 * metrics.kelp_recall);
  return buf;
}

std::string metrics_report_json(const MetricsReport& metrics,
                                const std::string& method_label,
                                double chosen_c, const RunConfig& config,
                                const CvResult* cv) {
  nlohmann::json doc;
  doc["method"] = method_label;
  doc["accuracy"] = metrics.accuracy;
  doc["mean_f1"] = metrics.mean_f1;
  doc["kelp_precision"] = metrics.kelp_precision;
  doc["kelp_recall"] = metrics.kelp_recall;
  doc["chosen_c"] = chosen_c;
  if (cv) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t ci = 0; ci < cv->mean_scores.size(); ++ci) {
      rows.push_back({{"c", config.train.c_grid[ci]},
                      {"mean_f1", cv->mean_scores[ci]},
                      {"std_f1", cv->std_score(ci)},
                      {"fold_f1", cv->fold_scores[ci]}});
    }
    doc["cv"] = {{"convention", "mean +/- sample standard deviation over folds"},
                 {"scores", std::move(rows)}};
  }
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [code, m] : metrics.per_class) {
    per_class[code] = {{"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support},
                       {"undefined_precision", m.undefined_precision}};
  }
  doc["per_class"] = std::move(per_class);
  doc["config"] = {{"backend", config.backend},
                   {"strategy", config.strategy},
                   {"node", config.node_id},
                   {"split", config.split},
                   {"c_grid", config.train.c_grid},
                   {"folds", config.train.folds},
                   {"seed", config.train.seed},
                   {"tolerance", config.train.tolerance},
                   {"class_weighting", weighting_name(config.train.weighting)}};
  return doc.dump(2) + "\n";
}

namespace {

std::string strategy_label(const std::string& strategy) {
  std::string label = strategy;
  if (!label.empty()) label[0] = char(std::toupper(label[0]));
  return label;
}

std::string backend_label(const std::string& backend) {
  return backend == "residual" ? "DRF" : "Stub";
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_summary(const std::vector<std::filesystem::path>& report_jsons,
                   const std::optional<std::filesystem::path>& coverage_csv,
                   const std::filesystem::path& out_dir) {
  nlohmann::json summary;
  summary["methods"] = nlohmann::json::array();
  std::string methods_csv = report_csv_header();

  for (const auto& path : report_jsons) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file_bytes(path.string()));
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::io_error,
            "invalid report JSON " + path.string() + ": " + e.what());
    }
    summary["methods"].push_back(doc);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.1f,%.2f,%.1f,%.1f\n",
                  doc.value("method", std::string("?")).c_str(),
                  100.0 * doc.value("accuracy", 0.0),
                  doc.value("mean_f1", 0.0),
                  100.0 * doc.value("kelp_precision", 0.0),
                  100.0 * doc.value("kelp_recall", 0.0));
    methods_csv += buf;
  }
  write_file_bytes((out_dir / "summary.csv").string(), methods_csv);

  // Per-site table in the layout of the coverage results: mean expert and
  // estimated cover plus an R^2 when a per-site fit is possible.
  std::string site_csv = "Site,Expert Identified (%),Estimated (%),R2\n";
  nlohmann::json sites = nlohmann::json::object();
  if (coverage_csv) {
    CsvTable table = read_csv(*coverage_csv);
    if (table.header != std::vector<std::string>{"image_id", "site", "year",
                                                 "expert_pct", "estimated_pct"})
      raise(Errc::io_error, "unexpected coverage.csv header");
    std::map<std::string, std::vector<CoverageRecord>> by_site;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      CoverageRecord record;
      record.image_id = row[0];
      record.site_id = row[1];
      record.year = std::stoi(row[2]);
      record.expert_pct = std::stod(row[3]);
      record.estimated_pct = std::stod(row[4]);
      by_site[record.site_id].push_back(std::move(record));
    }
    for (const auto& [site, records] : by_site) {
      auto grouped = aggregate(records, GroupBy::site);
      const GroupCoverage& g = grouped.at(site);
      std::string r2 = "";
      try {
        r2 = fmt2(fit_ols(records).r_squared);
      } catch (const Error&) {
        // fewer than 3 images or constant expert cover: leave R2 blank
      }
      site_csv += site + "," + fmt2(g.mean_expert_pct) + "," +
                  fmt2(g.mean_estimated_pct) + "," + r2 + "\n";
      sites[site] = {{"expert_pct", g.mean_expert_pct},
                     {"estimated_pct", g.mean_estimated_pct},
                     {"n_images", g.n_images}};
    }
  }
  write_file_bytes((out_dir / "site_table.csv").string(), site_csv);
  summary["sites"] = std::move(sites);
  write_file_bytes((out_dir / "summary.json").string(),
                   summary.dump(2) + "\n");
}

void write_hash_manifest(const std::filesystem::path& out_dir,
                         const std::vector<std::string>& relative_paths) {
  nlohmann::json files = nlohmann::json::object();
  for (const auto& rel : relative_paths) {
    std::filesystem::path p = out_dir / rel;
    if (!std::filesystem::exists(p)) continue;
    files[rel] = sha256_hex(read_file_bytes(p.string()));
  }
  nlohmann::json doc;
  doc["files"] = std::move(files);
  write_file_bytes((out_dir / "manifest.json").string(), doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Full pipeline

namespace {

struct StageClock {
  using clock = std::chrono::steady_clock;
  clock::time_point start = clock::now();

  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start).count();
  }
};

void log_stage(const char* stage, double seconds) {
  std::fprintf(stderr, "[benthoscan] %-10s %.2fs\n", stage, seconds);
}

std::string sanitize_filename(const std::string& name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config_in) {
  RunConfig config = config_in;
  if (config.images_csv.empty() || config.labels_csv.empty() ||
      config.taxonomy_path.empty() || config.out_dir.empty())
    raise(Errc::config_error,
          "images, labels, taxonomy and out directory are all required");
  for (const auto& p : {config.images_csv, config.labels_csv,
                        config.taxonomy_path})
    if (!std::filesystem::exists(p))
      raise(Errc::config_error, "input does not exist: " + p.string());

  std::filesystem::create_directories(config.out_dir);
  if (config.cache_path.empty()) {
    if (const char* env = std::getenv("BENTHOSCAN_CACHE"))
      config.cache_path = env;
    else
      config.cache_path = config.out_dir / "features.bsfc";
  }

  std::string resolved = config.to_json();
  write_file_bytes((config.out_dir / "resolved_config.json").string(),
                   resolved);
  // The tag stamped into model files hashes only the fields that influence
  // results, so two runs of one configuration into different output
  // directories still produce byte-identical models.
  RunConfig semantic = config;
  semantic.out_dir.clear();
  semantic.cache_path.clear();
  std::string run_tag = "run:" + sha256_hex(semantic.to_json()).substr(0, 16);

  PipelineResult result;

  // ingest
  StageClock ingest_clock;
  TaxonomyTree tree = load_taxonomy(config.taxonomy_path);
  Dataset dataset = parse_manifest(config.images_csv, config.labels_csv);
  validate_codes(dataset, tree);
  if (!tree.has_node(config.node_id))
    raise(Errc::unknown_node, config.node_id);
  log_stage("ingest", ingest_clock.seconds());

  // split
  SplitSpec split_spec = parse_split_spec(config.split);
  Split parts = split(dataset, split_spec);
  if (parts.test.labels.empty())
    raise(Errc::empty_test_set, "split produced no test points");
  result.train_points = parts.train.labels.size();
  result.test_points = parts.test.labels.size();

  // extract + cache
  StageClock extract_clock;
  auto backend = make_backend(config);
  FeatureStore store = FeatureStore::open(config.cache_path, kFeatureDim);
  std::filesystem::path image_root = config.images_csv.parent_path();
  result.features_added =
      cache_features(dataset, image_root, *backend, store, config.workers);
  double extract_seconds = extract_clock.seconds();
  log_stage("extract", extract_seconds);
  if (result.features_added > 0 && extract_seconds > 0.0)
    result.images_per_hour =
        double(dataset.images.size()) / (extract_seconds / 3600.0);
  std::fprintf(stderr, "[benthoscan] throughput  %.0f images/hour\n",
               result.images_per_hour);

  Samples train_x = gather_features(parts.train.labels, store, backend->id());
  Samples test_x = gather_features(parts.test.labels, store, backend->id());

  // train (cross-validation inside the train split only)
  StageClock train_clock;
  Strategy strategy = parse_strategy(config.strategy, config.node_id);
  TrainedClassifier classifier = train_strategy(
      strategy, tree, train_x, parts.train.labels, config.train,
      config.workers);
  result.chosen_c = classifier.chosen_c;
  log_stage("train", train_clock.seconds());

  // evaluate
  StageClock eval_clock;
  std::set<std::string> kelp_codes = descendants(tree, config.node_id);
  std::vector<std::string> truth;
  std::vector<std::string> predicted(parts.test.labels.size());
  std::vector<bool> truth_kelp(parts.test.labels.size());
  std::vector<bool> predicted_kelp(parts.test.labels.size());
  truth.reserve(parts.test.labels.size());

  if (strategy.kind == Strategy::Kind::flat) {
    for (const auto& label : parts.test.labels)
      truth.push_back(label.class_code);
    parallel_for(parts.test.labels.size(), config.workers, [&](std::size_t i) {
      predicted[i] = predict_flat(classifier, test_x[i]);
    });
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      truth_kelp[i] = kelp_codes.count(truth[i]) != 0;
      predicted_kelp[i] = kelp_codes.count(predicted[i]) != 0;
    }
    result.metrics = evaluate(predicted, truth, {}, kelp_codes);
  } else {
    for (std::size_t i = 0; i < parts.test.labels.size(); ++i)
      truth.push_back(kelp_codes.count(parts.test.labels[i].class_code)
                          ? "kelp"
                          : "non-kelp");
    parallel_for(parts.test.labels.size(), config.workers, [&](std::size_t i) {
      predicted[i] =
          predict_node_positive(classifier, test_x[i]) ? "kelp" : "non-kelp";
    });
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      truth_kelp[i] = truth[i] == "kelp";
      predicted_kelp[i] = predicted[i] == "kelp";
    }
    result.metrics = evaluate(predicted, truth, {}, {"kelp"});
  }
  result.method_label = backend_label(config.backend) + ": " +
                        strategy_label(config.strategy);
  log_stage("evaluate", eval_clock.seconds());

  // coverage
  StageClock cover_clock;
  std::vector<PointOutcome> outcomes(parts.test.labels.size());
  for (std::size_t i = 0; i < parts.test.labels.size(); ++i)
    outcomes[i] = {parts.test.labels[i].image_id, truth_kelp[i],
                   predicted_kelp[i]};
  result.records = estimate_cover(outcomes, parts.test.images);
  try {
    result.fit = fit_ols(result.records);
  } catch (const Error& e) {
    if (e.code() != Errc::degenerate_x && e.code() != Errc::no_labeled_points)
      throw;
    std::fprintf(stderr, "[benthoscan] coverage fit skipped: %s\n", e.what());
  }
  result.by_site = aggregate(result.records, GroupBy::site);
  result.by_year = aggregate(result.records, GroupBy::year);
  log_stage("coverage", cover_clock.seconds());

  // artifacts
  std::vector<std::string> artifacts = {"resolved_config.json"};
  std::filesystem::create_directories(config.out_dir / "models");
  auto save_with_tag = [&](LinearModel model, const std::string& rel) {
    model.backend_id = backend->id();
    model.created_at = run_tag;
    save_model(model, config.out_dir / rel);
    artifacts.push_back(rel);
  };
  if (strategy.kind == Strategy::Kind::flat) {
    for (const auto& model : classifier.flat_models)
      save_with_tag(model,
                    "models/" + sanitize_filename(model.positive_label) +
                        ".json");
  } else {
    save_with_tag(classifier.node->model,
                  "models/node_" + sanitize_filename(config.node_id) + "_" +
                      config.strategy + ".json");
  }

  write_file_bytes(
      (config.out_dir / "report.json").string(),
      metrics_report_json(result.metrics, result.method_label,
                          result.chosen_c, config,
                          classifier.cv ? &*classifier.cv : nullptr));
  write_file_bytes((config.out_dir / "report.csv").string(),
                   report_csv_header() +
                       report_csv_row(result.method_label, result.metrics));
  artifacts.push_back("report.json");
  artifacts.push_back("report.csv");

  std::string indicators = "image_id,x_px,y_px,correct\n";
  for (std::size_t i = 0; i < parts.test.labels.size(); ++i) {
    const auto& label = parts.test.labels[i];
    indicators += csv_escape(label.image_id) + "," +
                  std::to_string(label.x_px) + "," +
                  std::to_string(label.y_px) + "," +
                  (predicted[i] == truth[i] ? "1" : "0") + "\n";
  }
  write_file_bytes((config.out_dir / "indicators.csv").string(), indicators);
  artifacts.push_back("indicators.csv");

  write_file_bytes((config.out_dir / "coverage.csv").string(),
                   coverage_to_csv(result.records));
  artifacts.push_back("coverage.csv");
  if (result.fit) {
    write_file_bytes((config.out_dir / "fit.json").string(),
                     fit_to_json(*result.fit));
    write_file_bytes(
        (config.out_dir / "scatter.svg").string(),
        scatter_svg(result.records, *result.fit, result.method_label));
  } else {
    write_file_bytes((config.out_dir / "fit.json").string(),
                     "{\n  \"error\": \"DegenerateX\"\n}\n");
  }
  artifacts.push_back("fit.json");
  if (result.fit) artifacts.push_back("scatter.svg");

  write_summary({config.out_dir / "report.json"},
                config.out_dir / "coverage.csv", config.out_dir);
  artifacts.push_back("summary.json");
  artifacts.push_back("summary.csv");
  artifacts.push_back("site_table.csv");

  write_hash_manifest(config.out_dir, artifacts);
  return result;
}

}  // namespace benthoscan
