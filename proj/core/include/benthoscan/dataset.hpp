#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "benthoscan/taxonomy.hpp"

namespace benthoscan {

struct SurveyImage {
  std::string image_id;
  std::string file_path;
  std::string site_id;
  int year = 0;
  double depth_m = 0.0;
  int width_px = 0;
  int height_px = 0;
};

struct PointLabel {
  std::string image_id;
  int x_px = 0;
  int y_px = 0;
  std::string class_code;
};

constexpr int kMaxPointsPerImage = 50;

struct Dataset {
  std::vector<SurveyImage> images;
  std::vector<PointLabel> labels;
};

struct SplitSpec {
  enum class Policy { by_location_fraction, by_year };
  Policy policy = Policy::by_location_fraction;
  // by_location_fraction
  double fraction = 0.7;
  std::uint64_t seed = 0;
  // by_year
  std::set<int> train_years;
  std::set<int> test_years;

  static SplitSpec location_fraction(double fraction, std::uint64_t seed);
  static SplitSpec by_year(std::set<int> train_years, std::set<int> test_years);
};

struct Split {
  Dataset train;
  Dataset test;
};

struct DatasetSummary {
  std::map<std::string, std::size_t> per_class;
  std::size_t image_count = 0;
  std::size_t point_count = 0;
};

// Reads images.csv (image_id,file_path,site_id,year,depth_m,width_px,height_px)
// and labels.csv (image_id,x_px,y_px,class_code). Every label must reference a
// parsed image and fall inside its pixel bounds; an image may carry at most 50
// points. Row order is preserved.
Dataset parse_manifest(const std::filesystem::path& images_csv,
                       const std::filesystem::path& labels_csv);

// Checks that every label code exists in the taxonomy.
void validate_codes(const Dataset& dataset, const TaxonomyTree& tree);

// Image-level partition. by_location_fraction puts floor(fraction * n) images
// of each site into train using a per-site shuffle derived from the seed;
// by_year routes each image by its survey year.
Split split(const Dataset& dataset, const SplitSpec& spec);

DatasetSummary summarize(const std::vector<PointLabel>& labels);

// As above but reports zero counts for taxonomy codes absent from `labels`.
DatasetSummary summarize(const std::vector<PointLabel>& labels,
                         const TaxonomyTree& tree);

// Compact binary container written by `benthoscan ingest` and consumed by the
// later stages.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace benthoscan
