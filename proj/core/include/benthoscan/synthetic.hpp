#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "benthoscan/dataset.hpp"
#include "benthoscan/image.hpp"

namespace benthoscan {

// Deterministic desk-scale dataset for demos and end-to-end tests.
//
// Every image is a 2x2 mosaic of flat 224x224 tiles with one labeled point at
// each tile center, so each patch is exactly one uniform tile. Tile 0 is
// always black (SHAD) and tile 3 always white (SUS); they anchor the channel
// stretch so that the stretch is the identity on these images and equal tile
// colors produce equal patches across images. The two middle tiles cycle
// through a fixed palette of class colors chosen so that every palette entry
// occurs in both the even years (2010, train) and the odd years (2013, test).
struct SyntheticOptions {
  int images = 20;
  std::uint64_t seed = 7;
};

struct SyntheticTileClass {
  std::string code;
  std::array<std::uint8_t, 3> rgb;
};

const std::vector<SyntheticTileClass>& synthetic_palette();

struct SyntheticDataset {
  Dataset dataset;
  std::vector<RgbImage> pixels;  // aligned with dataset.images
};

SyntheticDataset make_synthetic(const SyntheticOptions& options);

// Writes images/<id>.png plus images.csv and labels.csv under dir.
void write_synthetic(const SyntheticOptions& options,
                     const std::filesystem::path& dir);

// The taxonomy shipped with the project covers all 78 survey codes; this
// returns its JSON text so tests and the synthesizer do not depend on an
// install location.
const std::string& default_taxonomy_json();

}  // namespace benthoscan
