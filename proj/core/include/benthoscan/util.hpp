#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace benthoscan {

// splitmix64 step; also used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// FNV-1a over bytes. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view bytes);

// Combines a user seed with a string key (site id, class code) so that
// per-group shuffles do not depend on group iteration order.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view key);

std::uint32_t crc32(const void* data, std::size_t length,
                    std::uint32_t seed = 0);

std::string base64_encode(const void* data, std::size_t length);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string sha256_hex(std::string_view bytes);

// Runs fn(0..n-1) on up to `workers` threads. Blocks until every index is
// done; the first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

// Little-endian scalar append/read used by the binary file formats.
void put_u16(std::string& out, std::uint16_t v);
void put_u32(std::string& out, std::uint32_t v);
void put_i32(std::string& out, std::int32_t v);
void put_f32(std::string& out, float v);
void put_f64(std::string& out, double v);

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size)
      : data_(data), size_(size) {}

  bool exhausted() const { return pos_ >= size_; }
  std::size_t remaining() const { return size_ - pos_; }
  std::size_t position() const { return pos_; }

  std::uint16_t u16();
  std::uint32_t u32();
  std::int32_t i32();
  float f32();
  double f64();
  std::string bytes(std::size_t n);
  void skip(std::size_t n);

 private:
  void require(std::size_t n) const;

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::string_view bytes);

}  // namespace benthoscan
