#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "benthoscan/rottnest.hpp"
#include "benthoscan/synthetic.hpp"
#include "benthoscan/taxonomy.hpp"

namespace fixtures {

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "benthoscan-tests" /
             (name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline const benthoscan::TaxonomyTree& survey_taxonomy() {
  static const benthoscan::TaxonomyTree tree =
      benthoscan::parse_taxonomy(benthoscan::default_taxonomy_json());
  return tree;
}

// Minimal kelp tree: root, macroalgae, kelp, other macroalgae, and a
// non-macroalgae branch.
inline const char* kKelpTreeJson = R"({
  "node_id": "1", "name": "Biota", "children": [
    {"node_id": "1.1", "name": "Macroalgae", "children": [
      {"node_id": "1.1.1", "code": "MAECK", "name": "Kelp"},
      {"node_id": "1.1.2", "name": "Other macroalgae", "children": [
        {"node_id": "1.1.2.1", "code": "MAENR", "name": "Red macroalgae"},
        {"node_id": "1.1.2.2", "code": "MASCY", "name": "Scytothalia"}
      ]}
    ]},
    {"node_id": "1.2", "name": "Non-macroalgae", "children": [
      {"node_id": "1.2.1", "code": "SPC", "name": "Sponge"},
      {"node_id": "1.2.2", "code": "SUS", "name": "Sand"}
    ]}
  ]
})";

// Writes a manifest with the full survey shape: one image row per survey
// image (years 2010-13), 50 labeled points per image, class counts exactly
// matching the published distribution on each side of the year split.
inline void write_survey_manifest(const std::filesystem::path& dir) {
  namespace bs = benthoscan;
  struct YearBlock {
    int year;
    int images;
  };
  const YearBlock blocks[] = {{2010, 1680}, {2011, 1680}, {2012, 1033},
                              {2013, 1563}};

  std::ofstream images(dir / "images.csv");
  images << "image_id,file_path,site_id,year,depth_m,width_px,height_px\n";
  int image_index = 0;
  for (const auto& block : blocks) {
    for (int i = 0; i < block.images; ++i, ++image_index) {
      char row[160];
      std::snprintf(row, sizeof(row),
                    "r%05d,images/r%05d.png,site-%d,%d,%d.0,1360,1024\n",
                    image_index, image_index, image_index % 5 + 1, block.year,
                    15 + 10 * (image_index % 3));
      images << row;
    }
  }

  // 50 slots per image; train classes fill the 2010-12 images, test classes
  // the 2013 images, in class-table order.
  std::ofstream labels(dir / "labels.csv");
  labels << "image_id,x_px,y_px,class_code\n";
  auto emit = [&](int first_image, long count, const char* code,
                  long& slot_cursor) {
    for (long k = 0; k < count; ++k, ++slot_cursor) {
      long image = first_image + slot_cursor / 50;
      long slot = slot_cursor % 50;
      char row[96];
      std::snprintf(row, sizeof(row), "r%05ld,%ld,%ld,%s\n", image,
                    (slot * 27 + 13) % 1360, (slot * 19 + 7) % 1024, code);
      labels << row;
    }
  };
  long train_cursor = 0, test_cursor = 0;
  const int first_test_image = 1680 + 1680 + 1033;
  for (const auto& row : bs::rottnest_class_rows()) {
    emit(0, row.train_points, row.code, train_cursor);
    emit(first_test_image, row.test_points, row.code, test_cursor);
  }
}

}  // namespace fixtures
