#include "benthoscan/features.hpp"

#include <algorithm>
#include <cmath>

#include "benthoscan/util.hpp"

namespace benthoscan {

FeatureVector global_max_pool(const ActivationBlock& block) {
  return pool_block(block, PoolMode::max);
}

FeatureVector pool_block(const ActivationBlock& block, PoolMode mode) {
  constexpr std::size_t spatial =
      std::size_t(ActivationBlock::kSpatial) * ActivationBlock::kSpatial;
  FeatureVector out;
  out.values.resize(kFeatureDim);
  for (std::size_t c = 0; c < kFeatureDim; ++c) {
    const float* cell = block.data.data() + c * spatial;
    if (mode == PoolMode::max) {
      float best = cell[0];
      for (std::size_t i = 1; i < spatial; ++i) best = std::max(best, cell[i]);
      out.values[c] = best;
    } else {
      double sum = 0.0;
      for (std::size_t i = 0; i < spatial; ++i) sum += cell[i];
      out.values[c] = float(sum / double(spatial));
    }
  }
  return out;
}

StubBackend::StubBackend(std::uint64_t key)
    : key_(key), id_("stub:" + std::to_string(key)) {}

std::uint64_t StubBackend::patch_digest(const Patch& patch,
                                        std::uint64_t key) {
  // FNV-1a over quantized bytes, seeded with the backend key.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ key;
  for (const auto& plane : patch.plane) {
    for (float v : plane) {
      float clamped = std::max(0.0f, std::min(1.0f, v));
      auto byte = std::uint8_t(std::lround(clamped * 255.0f));
      h ^= byte;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

FeatureVector StubBackend::extract(const Patch& patch) const {
  std::uint64_t digest = patch_digest(patch, key_);
  FeatureVector out;
  out.values.resize(kFeatureDim);
  for (std::size_t c = 0; c < kFeatureDim; ++c) {
    std::uint64_t state = digest + c;
    std::uint64_t bits = splitmix64(state);
    // 53 high bits -> uniform double in [0,1).
    out.values[c] = float(double(bits >> 11) * 0x1.0p-53);
  }
  out.backend_id = id_;
  out.image_id = patch.source_image_id;
  out.x = patch.center_x;
  out.y = patch.center_y;
  return out;
}

std::unique_ptr<FeatureBackend> make_stub_backend(std::uint64_t key) {
  return std::make_unique<StubBackend>(key);
}

}  // namespace benthoscan
