#pragma once

#include <array>
#include <filesystem>

#include "benthoscan/features.hpp"
#include "benthoscan/onnx.hpp"

namespace benthoscan {

struct ResidualBackendOptions {
  // Name of the activation tensor to capture; empty selects the input of the
  // graph's first global pooling node.
  std::string capture;
  PoolMode pool = PoolMode::max;
  // Input normalization of the pre-trained model, applied per channel as
  // (v - mean) / stdev. Defaults are the ImageNet statistics published with
  // the reference residual models.
  std::array<float, 3> mean = {0.485f, 0.456f, 0.406f};
  std::array<float, 3> stdev = {0.229f, 0.224f, 0.225f};
};

// Runs a pre-trained residual classification graph (ONNX) up to its final
// convolutional activations and pools them into a 2048-d vector. The
// activations must come out as 2048 channels of 7x7, the conv5 shape of the
// 50-layer residual architecture.
class ResidualBackend : public FeatureBackend {
 public:
  explicit ResidualBackend(const std::filesystem::path& model_path,
                           ResidualBackendOptions options = {});

  const std::string& id() const override { return id_; }
  FeatureVector extract(const Patch& patch) const override;

  // The captured conv5 activations for a patch, before pooling.
  ActivationBlock activations(const Patch& patch) const;

  const std::string& capture_tensor() const { return capture_; }

 private:
  onnx::Tensor patch_to_input(const Patch& patch) const;

  onnx::Model model_;
  ResidualBackendOptions options_;
  std::string input_name_;
  std::string capture_;
  std::string id_;
};

}  // namespace benthoscan
