#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "benthoscan/features.hpp"

namespace benthoscan {

struct FeatureKey {
  std::string image_id;
  int x = 0;
  int y = 0;
  std::string backend_id;

  auto operator<=>(const FeatureKey&) const = default;
};

// Append-only binary feature cache.
//
// Layout (little-endian):
//   header  "BSFC" | u16 version | u16 dim
//   record  u16 image_id_len | image_id | i32 x | i32 y |
//           u16 backend_id_len | backend_id | dim * f32 | u32 crc32
// The checksum covers the record bytes before it. A truncated or mismatched
// record raises CacheCorrupt.
class FeatureStore {
 public:
  static constexpr std::uint16_t kVersion = 1;

  // Opens an existing store (indexing and verifying its records) or creates
  // an empty one.
  static FeatureStore open(const std::filesystem::path& path,
                           std::size_t dim = kFeatureDim);

  FeatureStore(FeatureStore&& other) noexcept;

  std::size_t size() const;
  std::size_t dim() const { return dim_; }
  const std::filesystem::path& path() const { return path_; }

  bool contains(const FeatureKey& key) const;
  std::optional<std::vector<float>> get(const FeatureKey& key) const;

  // Appends one record; a key already present is left untouched and the call
  // returns false. Writes are serialized; readers are never blocked for the
  // duration of the file append.
  bool put(const FeatureKey& key, const std::vector<float>& values);

  std::vector<FeatureKey> keys() const;

 private:
  FeatureStore(std::filesystem::path path, std::size_t dim);

  std::filesystem::path path_;
  std::size_t dim_;
  std::map<FeatureKey, std::vector<float>> index_;
  mutable std::shared_mutex mutex_;
};

}  // namespace benthoscan
