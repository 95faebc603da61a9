#include "benthoscan/feature_store.hpp"

#include <fstream>
#include <mutex>

#include "benthoscan/error.hpp"
#include "benthoscan/util.hpp"

namespace benthoscan {

namespace {
constexpr char kMagic[4] = {'B', 'S', 'F', 'C'};

std::string encode_record(const FeatureKey& key,
                          const std::vector<float>& values) {
  std::string rec;
  put_u16(rec, std::uint16_t(key.image_id.size()));
  rec.append(key.image_id);
  put_i32(rec, key.x);
  put_i32(rec, key.y);
  put_u16(rec, std::uint16_t(key.backend_id.size()));
  rec.append(key.backend_id);
  for (float v : values) put_f32(rec, v);
  put_u32(rec, crc32(rec.data(), rec.size()));
  return rec;
}
}  // namespace

FeatureStore::FeatureStore(std::filesystem::path path, std::size_t dim)
    : path_(std::move(path)), dim_(dim) {}

FeatureStore::FeatureStore(FeatureStore&& other) noexcept
    : path_(std::move(other.path_)),
      dim_(other.dim_),
      index_(std::move(other.index_)) {}

FeatureStore FeatureStore::open(const std::filesystem::path& path,
                                std::size_t dim) {
  FeatureStore store(path, dim);
  if (!std::filesystem::exists(path)) {
    std::string header;
    header.append(kMagic, 4);
    put_u16(header, kVersion);
    put_u16(header, std::uint16_t(dim));
    write_file_bytes(path.string(), header);
    return store;
  }

  std::string bytes = read_file_bytes(path.string());
  ByteReader reader(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                    bytes.size());
  if (bytes.size() < 8 || reader.bytes(4) != std::string(kMagic, 4))
    raise(Errc::cache_corrupt, "bad magic in " + path.string());
  if (reader.u16() != kVersion)
    raise(Errc::cache_corrupt, "unsupported version in " + path.string());
  std::size_t file_dim = reader.u16();
  if (file_dim != dim)
    raise(Errc::cache_corrupt,
          "store dimension " + std::to_string(file_dim) + " != expected " +
              std::to_string(dim));

  while (!reader.exhausted()) {
    std::size_t record_start = reader.position();
    FeatureKey key;
    key.image_id = reader.bytes(reader.u16());
    key.x = reader.i32();
    key.y = reader.i32();
    key.backend_id = reader.bytes(reader.u16());
    std::vector<float> values(dim);
    for (std::size_t i = 0; i < dim; ++i) values[i] = reader.f32();
    std::uint32_t expected =
        crc32(bytes.data() + record_start, reader.position() - record_start);
    if (reader.u32() != expected)
      raise(Errc::cache_corrupt,
            "checksum mismatch for record of " + key.image_id + " in " +
                path.string());
    store.index_[key] = std::move(values);
  }
  return store;
}

std::size_t FeatureStore::size() const {
  std::shared_lock lock(mutex_);
  return index_.size();
}

bool FeatureStore::contains(const FeatureKey& key) const {
  std::shared_lock lock(mutex_);
  return index_.count(key) != 0;
}

std::optional<std::vector<float>> FeatureStore::get(
    const FeatureKey& key) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool FeatureStore::put(const FeatureKey& key,
                       const std::vector<float>& values) {
  if (values.size() != dim_)
    raise(Errc::dimension_mismatch,
          "feature of length " + std::to_string(values.size()) +
              " for store of dim " + std::to_string(dim_));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = index_.emplace(key, values);
  (void)it;
  if (!inserted) return false;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) raise(Errc::io_error, "cannot append to " + path_.string());
  std::string rec = encode_record(key, values);
  out.write(rec.data(), std::streamsize(rec.size()));
  if (!out) raise(Errc::io_error, "short write to " + path_.string());
  return true;
}

std::vector<FeatureKey> FeatureStore::keys() const {
  std::shared_lock lock(mutex_);
  std::vector<FeatureKey> out;
  out.reserve(index_.size());
  for (const auto& [key, values] : index_) {
    (void)values;
    out.push_back(key);
  }
  return out;
}

}  // namespace benthoscan
