#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace benthoscan::onnx {

struct Tensor {
  std::vector<std::int64_t> dims;
  std::vector<float> data;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= std::size_t(d);
    return n;
  }
};

struct Attr {
  std::int64_t i = 0;
  float f = 0.0f;
  std::string s;
  std::vector<std::int64_t> ints;
  std::vector<float> floats;
};

struct Node {
  std::string name;
  std::string op_type;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, Attr> attrs;
};

// The subset of an ONNX model needed to run an image-classification graph up
// to its final convolutional activations: the node list, float initializers
// and graph input/output names. Everything else in the file is skipped.
struct Model {
  std::vector<Node> nodes;
  std::map<std::string, Tensor> initializers;
  std::vector<std::string> graph_inputs;
  std::vector<std::string> graph_outputs;

  static Model load(const std::filesystem::path& path);
  static Model parse(const std::string& bytes);

  // First graph input that is not an initializer.
  std::string default_input() const;

  // Input of the first GlobalAveragePool/GlobalMaxPool node — the final
  // convolutional activation in residual classification graphs — falling
  // back to the last node's output.
  std::string auto_capture() const;
};

// Executes nodes in file order until `capture` has been produced and returns
// it. Supported ops: Conv (group 1, dilation 1), BatchNormalization, Relu,
// MaxPool, AveragePool, GlobalMaxPool, GlobalAveragePool, Add, Identity.
// Anything else reachable before the capture point raises InferenceFailure.
Tensor run_graph(const Model& model, const std::string& input_name,
                 Tensor input, const std::string& capture);

}  // namespace benthoscan::onnx
