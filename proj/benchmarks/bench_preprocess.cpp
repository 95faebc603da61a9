#include <benchmark/benchmark.h>

#include <random>

#include "benthoscan/image.hpp"

using namespace benthoscan;

namespace {

RgbImage make_image(int side) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
  RgbImage image(side, side);
  for (auto& plane : image.plane)
    for (auto& v : plane) v = uniform(rng);
  return image;
}

}  // namespace

static void BM_ColorStretch(benchmark::State& state) {
  RgbImage image = make_image(int(state.range(0)));
  for (auto _ : state) {
    StretchResult result = color_stretch(image);
    benchmark::DoNotOptimize(result.image.plane[0].data());
  }
  state.SetBytesProcessed(state.iterations() * int64_t(image.pixel_count()) * 3 * 4);
}
BENCHMARK(BM_ColorStretch)->Arg(448)->Arg(1024);

static void BM_ExtractPatch(benchmark::State& state) {
  RgbImage image = make_image(1024);
  PointLabel point;
  point.image_id = "bench";
  point.x_px = 512;
  point.y_px = 512;
  for (auto _ : state) {
    Patch patch = extract_patch(image, point);
    benchmark::DoNotOptimize(patch.plane[0].data());
  }
}
BENCHMARK(BM_ExtractPatch);
