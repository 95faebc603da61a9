#pragma once

#include <array>
#include <string>
#include <vector>

#include "benthoscan/dataset.hpp"

namespace benthoscan {

// Planar RGB with intensities normalized to [0,1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::array<std::vector<float>, 3> plane;

  RgbImage() = default;
  RgbImage(int w, int h, float fill = 0.0f);

  float at(int channel, int y, int x) const {
    return plane[std::size_t(channel)][std::size_t(y) * std::size_t(width) + std::size_t(x)];
  }
  float& at(int channel, int y, int x) {
    return plane[std::size_t(channel)][std::size_t(y) * std::size_t(width) + std::size_t(x)];
  }
  std::size_t pixel_count() const {
    return std::size_t(width) * std::size_t(height);
  }
};

constexpr int kPatchSize = 224;
constexpr int kPatchHalf = kPatchSize / 2;  // 112

// 224x224x3 window centered at a labelled pixel.
struct Patch {
  std::array<std::vector<float>, 3> plane;  // each kPatchSize * kPatchSize
  std::string source_image_id;
  int center_x = 0;
  int center_y = 0;

  float at(int channel, int y, int x) const {
    return plane[std::size_t(channel)][std::size_t(y) * kPatchSize + std::size_t(x)];
  }
};

struct StretchResult {
  RgbImage image;
  // A channel whose shifted top-1% mean falls below epsilon has no dynamic
  // range; it is passed through unchanged and flagged here.
  std::array<bool, 3> degenerate_channel = {false, false, false};
};

constexpr double kStretchEpsilon = 1e-9;

// Per channel: subtract the mean of the lowest 1% of intensities, clamp
// negatives to zero, then divide by the mean of the top 1% of the shifted
// intensities and clamp to [0,1]. The percentile set size is
// max(1, floor(0.01 * pixel_count)), taken from a full sort.
StretchResult color_stretch(const RgbImage& image);

// Patch rows cover y-112..y+111 and columns x-112..x+111; samples outside the
// image are filled by edge replication.
Patch extract_patch(const RgbImage& image, const PointLabel& point);

}  // namespace benthoscan
