#pragma once

#include <filesystem>

#include "benthoscan/image.hpp"

namespace benthoscan {

// Decodes an 8-bit PNG or baseline JPEG into normalized planar RGB. The
// format is sniffed from the file signature, not the extension.
RgbImage load_image(const std::filesystem::path& path);

void save_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace benthoscan
