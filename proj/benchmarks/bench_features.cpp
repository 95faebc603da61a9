#include <benchmark/benchmark.h>

#include <random>

#include "benthoscan/features.hpp"

using namespace benthoscan;

static void BM_GlobalMaxPool(benchmark::State& state) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<float> uniform(-1.0f, 1.0f);
  ActivationBlock block;
  for (auto& v : block.data) v = uniform(rng);
  for (auto _ : state) {
    FeatureVector pooled = global_max_pool(block);
    benchmark::DoNotOptimize(pooled.values.data());
  }
  state.SetBytesProcessed(state.iterations() * int64_t(block.data.size()) * 4);
}
BENCHMARK(BM_GlobalMaxPool);

static void BM_StubExtract(benchmark::State& state) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
  Patch patch;
  patch.source_image_id = "bench";
  for (auto& plane : patch.plane) {
    plane.resize(std::size_t(kPatchSize) * kPatchSize);
    for (auto& v : plane) v = uniform(rng);
  }
  StubBackend backend(0);
  for (auto _ : state) {
    FeatureVector vec = backend.extract(patch);
    benchmark::DoNotOptimize(vec.values.data());
  }
  // one patch per labeled point: items/s approximates points/hour / 3600
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StubExtract);
