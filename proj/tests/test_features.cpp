#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "benthoscan/error.hpp"
#include "benthoscan/feature_store.hpp"
#include "benthoscan/features.hpp"
#include "helpers/fixtures.hpp"
#include "helpers/oracles.hpp"

using namespace benthoscan;

namespace {

Patch uniform_patch(float value, const std::string& image_id = "img") {
  Patch patch;
  patch.source_image_id = image_id;
  for (auto& plane : patch.plane)
    plane.assign(std::size_t(kPatchSize) * kPatchSize, value);
  return patch;
}

std::vector<float> naive_pool_max(const ActivationBlock& block) {
  std::vector<float> out(ActivationBlock::kChannels,
                         -std::numeric_limits<float>::infinity());
  for (int row = 0; row < ActivationBlock::kSpatial; ++row)
    for (int col = 0; col < ActivationBlock::kSpatial; ++col)
      for (std::size_t c = 0; c < ActivationBlock::kChannels; ++c)
        out[c] = std::max(out[c], block.at(row, col, c));
  return out;
}

}  // namespace

TEST_CASE("max pool of an all-zero block is the zero vector") {
  ActivationBlock block;
  FeatureVector pooled = global_max_pool(block);
  REQUIRE(pooled.values.size() == kFeatureDim);
  for (float v : pooled.values) CHECK(v == 0.0f);
}

TEST_CASE("single support value lands in its channel only") {
  ActivationBlock block;
  block.at(3, 3, 7) = 5.0f;
  FeatureVector pooled = global_max_pool(block);
  CHECK(pooled.values[7] == 5.0f);
  CHECK(pooled.values[6] == 0.0f);
  CHECK(pooled.values[8] == 0.0f);
}

TEST_CASE("random blocks equal the naive triple loop exactly") {
  oracles::Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    ActivationBlock block;
    for (auto& v : block.data) v = float(rng.uniform(-4.0, 4.0));
    CHECK(global_max_pool(block).values == naive_pool_max(block));
  }
}

TEST_CASE("max pool is invariant to spatial permutation") {
  oracles::Rng rng(4);
  ActivationBlock block;
  for (auto& v : block.data) v = float(rng.uniform(-1.0, 1.0));

  // rotate the 49 spatial positions per channel
  ActivationBlock rotated;
  constexpr std::size_t spatial = 49;
  for (std::size_t c = 0; c < ActivationBlock::kChannels; ++c)
    for (std::size_t s = 0; s < spatial; ++s)
      rotated.data[c * spatial + (s + 13) % spatial] =
          block.data[c * spatial + s];
  CHECK(global_max_pool(rotated).values == global_max_pool(block).values);
}

TEST_CASE("average pooling is available behind the mode switch") {
  ActivationBlock block;
  for (std::size_t s = 0; s < 49; ++s) block.data[s] = float(s);
  FeatureVector avg = pool_block(block, PoolMode::average);
  CHECK(avg.values[0] == doctest::Approx(24.0));
  CHECK(pool_block(block, PoolMode::max).values[0] == 48.0f);
}

TEST_CASE("stub backend reproduces its documented keyed-hash construction") {
  StubBackend backend(0);
  Patch zeros = uniform_patch(0.0f);
  FeatureVector vec = backend.extract(zeros);
  REQUIRE(vec.values.size() == kFeatureDim);

  // independent recomputation of the documented scheme: FNV-1a over the
  // quantized bytes (all zero here), then splitmix64(digest + c) mapped to
  // [0,1)
  std::uint64_t digest = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < 3 * std::size_t(kPatchSize) * kPatchSize; ++i)
    digest = (digest ^ 0) * 0x100000001b3ULL;
  for (std::size_t c : {std::size_t(0), std::size_t(1), std::size_t(2047)}) {
    std::uint64_t state = digest + c;
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    CHECK(vec.values[c] == float(double(z >> 11) * 0x1.0p-53));
  }
}

TEST_CASE("stub extraction is deterministic and key-sensitive") {
  oracles::Rng rng(11);
  Patch patch = uniform_patch(0.0f);
  for (auto& plane : patch.plane)
    for (auto& v : plane) v = float(rng.uniform());

  StubBackend backend(0);
  FeatureVector a = backend.extract(patch);
  FeatureVector b = backend.extract(patch);
  CHECK(a.values == b.values);  // bitwise identical

  StubBackend keyed(1);
  CHECK(keyed.extract(patch).values != a.values);
  CHECK(keyed.id() != backend.id());

  for (float v : a.values) {
    CHECK(v >= 0.0f);
    CHECK(std::isfinite(v));
  }
}

TEST_CASE("feature store holds one entry per point and skips reruns") {
  auto dir = fixtures::fresh_dir("store");
  auto path = dir / "cache.bsfc";
  StubBackend backend(0);

  std::vector<FeatureKey> keys;
  {
    FeatureStore store = FeatureStore::open(path);
    for (int i = 0; i < 6; ++i) {
      Patch patch = uniform_patch(float(i) / 8.0f, "img-" + std::to_string(i));
      FeatureVector vec = backend.extract(patch);
      FeatureKey key{patch.source_image_id, 10, 20, backend.id()};
      CHECK(store.put(key, vec.values));
      keys.push_back(key);
    }
    CHECK(store.size() == 6);
    // rerun: zero new entries
    for (const auto& key : keys) {
      Patch patch = uniform_patch(0.5f, key.image_id);
      CHECK_FALSE(store.put(key, backend.extract(patch).values));
    }
    CHECK(store.size() == 6);
  }

  // reopen: round trip returns equal vectors
  FeatureStore reopened = FeatureStore::open(path);
  CHECK(reopened.size() == 6);
  for (int i = 0; i < 6; ++i) {
    Patch patch = uniform_patch(float(i) / 8.0f, "img-" + std::to_string(i));
    auto stored = reopened.get(keys[std::size_t(i)]);
    REQUIRE(stored.has_value());
    CHECK(*stored == backend.extract(patch).values);
  }
  CHECK_FALSE(reopened.contains({"img-0", 11, 20, backend.id()}));
}

TEST_CASE("flipping a stored byte is caught by the checksum") {
  auto dir = fixtures::fresh_dir("store-corrupt");
  auto path = dir / "cache.bsfc";
  {
    FeatureStore store = FeatureStore::open(path);
    StubBackend backend(0);
    store.put({"img", 1, 2, backend.id()},
              backend.extract(uniform_patch(0.25f)).values);
  }
  {
    std::fstream file(path, std::ios::in | std::ios::out | std::ios::binary);
    file.seekp(-40, std::ios::end);
    char byte;
    file.read(&byte, 1);
    file.seekp(-40, std::ios::end);
    byte = char(byte ^ 0x40);
    file.write(&byte, 1);
  }
  try {
    FeatureStore::open(path);
    FAIL("expected CacheCorrupt");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::cache_corrupt);
  }
}

TEST_CASE("a truncated trailing record is rejected") {
  auto dir = fixtures::fresh_dir("store-trunc");
  auto path = dir / "cache.bsfc";
  {
    FeatureStore store = FeatureStore::open(path);
    StubBackend backend(0);
    store.put({"img", 1, 2, backend.id()},
              backend.extract(uniform_patch(0.25f)).values);
  }
  auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 5);
  CHECK_THROWS_AS(FeatureStore::open(path), Error);
}
