#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "benthoscan/coverage.hpp"
#include "benthoscan/dataset.hpp"
#include "benthoscan/feature_store.hpp"
#include "benthoscan/hierclass.hpp"
#include "benthoscan/metrics.hpp"
#include "benthoscan/svm.hpp"

namespace benthoscan {

struct RunConfig {
  std::filesystem::path images_csv;
  std::filesystem::path labels_csv;
  std::filesystem::path taxonomy_path;
  std::filesystem::path model_path;  // residual backend only
  std::filesystem::path out_dir;
  std::filesystem::path cache_path;  // defaults to <out>/features.bsfc;
                                     // BENTHOSCAN_CACHE overrides
  std::string backend = "stub";      // stub | residual
  std::uint64_t stub_key = 0;
  std::string strategy = "sibling";  // flat | inclusive | sibling | global
  std::string node_id = "1.1.1";
  std::string split = "location:0.7:0";
  TrainConfig train;
  int workers = 1;

  std::string to_json() const;
  static RunConfig from_json(const std::string& json_text);
};

// "location:<fraction>:<seed>" or "years:Y,Y,.../Y,Y,...".
SplitSpec parse_split_spec(const std::string& text);
Strategy parse_strategy(const std::string& name, const std::string& node_id);

// Builds an extraction backend from the config (BackendUnavailable when a
// residual model path is missing).
std::unique_ptr<FeatureBackend> make_backend(const RunConfig& config);

// Stretch + patch + extract for every labeled point of `dataset`, storing
// vectors in the cache keyed by (image_id, x, y, backend_id). Images already
// cached for this backend are skipped. Returns the number of new records.
std::size_t cache_features(const Dataset& dataset,
                           const std::filesystem::path& image_root,
                           const FeatureBackend& backend, FeatureStore& store,
                           int workers);

// Loads cached vectors for the labels, in label order.
Samples gather_features(const std::vector<PointLabel>& labels,
                        const FeatureStore& store,
                        const std::string& backend_id);

struct PipelineResult {
  MetricsReport metrics;
  std::string method_label;
  double chosen_c = 0.0;
  std::vector<CoverageRecord> records;
  std::optional<RegressionFit> fit;
  std::map<std::string, GroupCoverage> by_site;
  std::map<std::string, GroupCoverage> by_year;
  std::size_t train_points = 0;
  std::size_t test_points = 0;
  std::size_t features_added = 0;
  double images_per_hour = 0.0;
};

// ingest -> split -> extract/cache -> train (CV inside the train split) ->
// evaluate -> coverage, writing every artifact under config.out_dir.
// Identical config + seed produces byte-identical artifacts.
PipelineResult run_pipeline(const RunConfig& config);

// Serialization used by both run_pipeline and the report subcommand. The
// optional CV block quotes per-C scores as mean +/- sample standard
// deviation over folds.
std::string metrics_report_json(const MetricsReport& metrics,
                                const std::string& method_label,
                                double chosen_c, const RunConfig& config,
                                const CvResult* cv = nullptr);
std::string report_csv_header();
std::string report_csv_row(const std::string& method_label,
                           const MetricsReport& metrics);

// Merges one or more report.json files and an optional coverage.csv into
// summary.csv / site_table.csv / summary.json under out_dir.
void write_summary(const std::vector<std::filesystem::path>& report_jsons,
                   const std::optional<std::filesystem::path>& coverage_csv,
                   const std::filesystem::path& out_dir);

// {"files": {relative path: sha256}} across the named files.
void write_hash_manifest(const std::filesystem::path& out_dir,
                         const std::vector<std::string>& relative_paths);

}  // namespace benthoscan
