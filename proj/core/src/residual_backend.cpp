#include "benthoscan/residual_backend.hpp"

#include <cstdio>

#include "benthoscan/error.hpp"

namespace benthoscan {

namespace {

std::string format_triplet(const std::array<float, 3>& v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g,%.4g,%.4g", double(v[0]), double(v[1]),
                double(v[2]));
  return buf;
}

}  // namespace

ResidualBackend::ResidualBackend(const std::filesystem::path& model_path,
                                 ResidualBackendOptions options)
    : model_(onnx::Model::load(model_path)), options_(options) {
  input_name_ = model_.default_input();
  capture_ = options_.capture.empty() ? model_.auto_capture() : options_.capture;
  // The id doubles as the cache key component, so it has to pin everything
  // that changes the produced vectors: model identity, capture point, pooling
  // and input normalization.
  id_ = "residual(" + model_path.filename().string() + ",capture=" + capture_ +
        ",pool=" + (options_.pool == PoolMode::max ? "max" : "avg") +
        ",mean=" + format_triplet(options_.mean) +
        ",std=" + format_triplet(options_.stdev) + ")";
}

onnx::Tensor ResidualBackend::patch_to_input(const Patch& patch) const {
  onnx::Tensor input;
  input.dims = {1, 3, kPatchSize, kPatchSize};
  input.data.resize(std::size_t(3) * kPatchSize * kPatchSize);
  for (int c = 0; c < 3; ++c) {
    const auto& plane = patch.plane[std::size_t(c)];
    float mean = options_.mean[std::size_t(c)];
    float inv_std = 1.0f / options_.stdev[std::size_t(c)];
    float* out = input.data.data() + std::size_t(c) * kPatchSize * kPatchSize;
    for (std::size_t i = 0; i < plane.size(); ++i)
      out[i] = (plane[i] - mean) * inv_std;
  }
  return input;
}

ActivationBlock ResidualBackend::activations(const Patch& patch) const {
  onnx::Tensor captured =
      onnx::run_graph(model_, input_name_, patch_to_input(patch), capture_);
  constexpr std::int64_t kC = std::int64_t(ActivationBlock::kChannels);
  constexpr std::int64_t kS = ActivationBlock::kSpatial;
  bool shape_ok =
      (captured.dims == std::vector<std::int64_t>{1, kC, kS, kS}) ||
      (captured.dims == std::vector<std::int64_t>{kC, kS, kS});
  if (!shape_ok)
    raise(Errc::inference_failure,
          "captured tensor " + capture_ + " is not 2048x7x7");
  ActivationBlock block;
  block.data = std::move(captured.data);
  return block;
}

FeatureVector ResidualBackend::extract(const Patch& patch) const {
  FeatureVector out = pool_block(activations(patch), options_.pool);
  out.backend_id = id_;
  out.image_id = patch.source_image_id;
  out.x = patch.center_x;
  out.y = patch.center_y;
  return out;
}

}  // namespace benthoscan
