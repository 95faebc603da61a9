#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "benthoscan/image.hpp"

namespace benthoscan {

constexpr std::size_t kFeatureDim = 2048;

struct FeatureVector {
  std::vector<float> values;  // always kFeatureDim long
  std::string backend_id;
  std::string image_id;
  int x = 0;
  int y = 0;
};

// Final convolutional block activations, stored channel-major
// (channel, row, column).
struct ActivationBlock {
  static constexpr int kSpatial = 7;
  static constexpr std::size_t kChannels = kFeatureDim;

  std::vector<float> data;  // kChannels * kSpatial * kSpatial

  ActivationBlock() : data(kChannels * kSpatial * kSpatial, 0.0f) {}

  float at(int row, int col, std::size_t channel) const {
    return data[channel * kSpatial * kSpatial + std::size_t(row) * kSpatial +
                std::size_t(col)];
  }
  float& at(int row, int col, std::size_t channel) {
    return data[channel * kSpatial * kSpatial + std::size_t(row) * kSpatial +
                std::size_t(col)];
  }
};

enum class PoolMode { max, average };

// values[c] = max over the 49 spatial positions of channel c.
FeatureVector global_max_pool(const ActivationBlock& block);

FeatureVector pool_block(const ActivationBlock& block, PoolMode mode);

class FeatureBackend {
 public:
  virtual ~FeatureBackend() = default;
  virtual const std::string& id() const = 0;
  // Deterministic: identical patch bytes produce identical vectors.
  virtual FeatureVector extract(const Patch& patch) const = 0;
};

// Keyed hash of the quantized patch bytes. Carries no semantic structure;
// its only guarantees are determinism and fixed dimension. It exists so the
// whole pipeline runs with no model file and no accelerator.
class StubBackend : public FeatureBackend {
 public:
  explicit StubBackend(std::uint64_t key = 0);

  const std::string& id() const override { return id_; }
  FeatureVector extract(const Patch& patch) const override;

  // Digest of the quantized pixel bytes (plane-major r,g,b; row-major within
  // a plane; each value rounded to 0..255). Exposed so tests can recompute
  // the documented construction independently.
  static std::uint64_t patch_digest(const Patch& patch, std::uint64_t key);

 private:
  std::uint64_t key_;
  std::string id_;
};

std::unique_ptr<FeatureBackend> make_stub_backend(std::uint64_t key = 0);

}  // namespace benthoscan
