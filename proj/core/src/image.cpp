#include "benthoscan/image.hpp"

#include <algorithm>
#include <cmath>

#include "benthoscan/error.hpp"

namespace benthoscan {

RgbImage::RgbImage(int w, int h, float fill) : width(w), height(h) {
  for (auto& p : plane)
    p.assign(std::size_t(w) * std::size_t(h), fill);
}

StretchResult color_stretch(const RgbImage& image) {
  StretchResult result;
  result.image = image;
  if (image.pixel_count() == 0) return result;

  std::size_t n = image.pixel_count();
  std::size_t tail = std::max<std::size_t>(1, n / 100);

  std::vector<float> sorted;
  for (int c = 0; c < 3; ++c) {
    sorted = image.plane[std::size_t(c)];
    std::sort(sorted.begin(), sorted.end());

    double lo = 0.0;
    for (std::size_t i = 0; i < tail; ++i) lo += sorted[i];
    lo /= double(tail);

    // Top 1% of the shifted channel. The shift is x -> max(x - lo, 0), which
    // is monotone, so the top values come from the top of the sorted order.
    double hi = 0.0;
    for (std::size_t i = n - tail; i < n; ++i)
      hi += std::max(double(sorted[i]) - lo, 0.0);
    hi /= double(tail);

    if (hi < kStretchEpsilon) {
      result.degenerate_channel[std::size_t(c)] = true;
      continue;
    }
    auto& out = result.image.plane[std::size_t(c)];
    for (std::size_t i = 0; i < n; ++i) {
      double shifted = std::max(double(out[i]) - lo, 0.0);
      out[i] = float(std::min(shifted / hi, 1.0));
    }
  }
  return result;
}

Patch extract_patch(const RgbImage& image, const PointLabel& point) {
  if (point.x_px < 0 || point.x_px >= image.width || point.y_px < 0 ||
      point.y_px >= image.height)
    raise(Errc::point_out_of_bounds,
          "(" + std::to_string(point.x_px) + "," + std::to_string(point.y_px) +
              ") outside " + std::to_string(image.width) + "x" +
              std::to_string(image.height));

  Patch patch;
  patch.source_image_id = point.image_id;
  patch.center_x = point.x_px;
  patch.center_y = point.y_px;
  for (auto& p : patch.plane)
    p.resize(std::size_t(kPatchSize) * kPatchSize);

  for (int c = 0; c < 3; ++c) {
    for (int dy = 0; dy < kPatchSize; ++dy) {
      int sy = std::clamp(point.y_px - kPatchHalf + dy, 0, image.height - 1);
      for (int dx = 0; dx < kPatchSize; ++dx) {
        int sx = std::clamp(point.x_px - kPatchHalf + dx, 0, image.width - 1);
        patch.plane[std::size_t(c)][std::size_t(dy) * kPatchSize + std::size_t(dx)] =
            image.at(c, sy, sx);
      }
    }
  }
  return patch;
}

}  // namespace benthoscan
