#include "benthoscan/onnx.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "benthoscan/error.hpp"
#include "benthoscan/util.hpp"

namespace benthoscan::onnx {

namespace {

// ---------------------------------------------------------------------------
// Protobuf wire reader. Only what the ONNX subset needs: varint, 32-bit
// fixed, and length-delimited fields; unknown fields are skipped.

class WireReader {
 public:
  WireReader(const char* data, std::size_t size)
      : p_(reinterpret_cast<const std::uint8_t*>(data)), end_(p_ + size) {}

  bool done() const { return p_ >= end_; }

  bool next_field(std::uint32_t& field, std::uint32_t& wire) {
    if (done()) return false;
    std::uint64_t tag = varint();
    field = std::uint32_t(tag >> 3);
    wire = std::uint32_t(tag & 7);
    return true;
  }

  std::uint64_t varint() {
    std::uint64_t value = 0;
    int shift = 0;
    while (p_ < end_) {
      std::uint8_t byte = *p_++;
      value |= std::uint64_t(byte & 0x7f) << shift;
      if ((byte & 0x80) == 0) return value;
      shift += 7;
      if (shift >= 64) break;
    }
    raise(Errc::inference_failure, "malformed varint in model file");
  }

  std::uint32_t fixed32() {
    require(4);
    std::uint32_t v;
    std::memcpy(&v, p_, 4);
    p_ += 4;
    return v;
  }

  std::uint64_t fixed64() {
    require(8);
    std::uint64_t v;
    std::memcpy(&v, p_, 8);
    p_ += 8;
    return v;
  }

  float float32() {
    std::uint32_t bits = fixed32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  std::string_view bytes() {
    std::uint64_t len = varint();
    require(std::size_t(len));
    std::string_view view(reinterpret_cast<const char*>(p_), std::size_t(len));
    p_ += len;
    return view;
  }

  void skip(std::uint32_t wire) {
    switch (wire) {
      case 0: varint(); break;
      case 1: fixed64(); break;
      case 2: bytes(); break;
      case 5: fixed32(); break;
      default:
        raise(Errc::inference_failure, "unsupported wire type in model file");
    }
  }

 private:
  void require(std::size_t n) const {
    if (p_ + n > end_)
      raise(Errc::inference_failure, "truncated model file");
  }

  const std::uint8_t* p_;
  const std::uint8_t* end_;
};

// Packed repeated fields arrive as one length-delimited blob; unpacked ones
// repeat the field per element. Both encodings appear in the wild.
void read_repeated_int64(WireReader& reader, std::uint32_t wire,
                         std::vector<std::int64_t>& out) {
  if (wire == 2) {
    std::string_view blob = reader.bytes();
    WireReader inner(blob.data(), blob.size());
    while (!inner.done()) out.push_back(std::int64_t(inner.varint()));
  } else {
    out.push_back(std::int64_t(reader.varint()));
  }
}

void read_repeated_float(WireReader& reader, std::uint32_t wire,
                         std::vector<float>& out) {
  if (wire == 2) {
    std::string_view blob = reader.bytes();
    WireReader inner(blob.data(), blob.size());
    while (!inner.done()) out.push_back(inner.float32());
  } else {
    out.push_back(reader.float32());
  }
}

constexpr int kTensorProtoFloat = 1;

// TensorProto: dims=1, data_type=2, float_data=4, name=8, raw_data=9.
bool parse_tensor(std::string_view blob, std::string& name, Tensor& tensor) {
  WireReader reader(blob.data(), blob.size());
  int data_type = kTensorProtoFloat;
  std::string_view raw;
  std::uint32_t field, wire;
  while (reader.next_field(field, wire)) {
    switch (field) {
      case 1: read_repeated_int64(reader, wire, tensor.dims); break;
      case 2: data_type = int(reader.varint()); break;
      case 4: read_repeated_float(reader, wire, tensor.data); break;
      case 8: name = std::string(reader.bytes()); break;
      case 9: raw = reader.bytes(); break;
      default: reader.skip(wire); break;
    }
  }
  if (data_type != kTensorProtoFloat) return false;
  if (!raw.empty()) {
    tensor.data.resize(raw.size() / 4);
    std::memcpy(tensor.data.data(), raw.data(), tensor.data.size() * 4);
  }
  return true;
}

// AttributeProto: name=1, f=2, i=3, s=4, floats=7, ints=8.
void parse_attr(std::string_view blob, Node& node) {
  WireReader reader(blob.data(), blob.size());
  std::string name;
  Attr attr;
  std::uint32_t field, wire;
  while (reader.next_field(field, wire)) {
    switch (field) {
      case 1: name = std::string(reader.bytes()); break;
      case 2: attr.f = reader.float32(); break;
      case 3: attr.i = std::int64_t(reader.varint()); break;
      case 4: attr.s = std::string(reader.bytes()); break;
      case 7: read_repeated_float(reader, wire, attr.floats); break;
      case 8: read_repeated_int64(reader, wire, attr.ints); break;
      default: reader.skip(wire); break;
    }
  }
  if (!name.empty()) node.attrs[name] = std::move(attr);
}

// NodeProto: input=1, output=2, name=3, op_type=4, attribute=5.
Node parse_node(std::string_view blob) {
  WireReader reader(blob.data(), blob.size());
  Node node;
  std::uint32_t field, wire;
  while (reader.next_field(field, wire)) {
    switch (field) {
      case 1: node.inputs.emplace_back(reader.bytes()); break;
      case 2: node.outputs.emplace_back(reader.bytes()); break;
      case 3: node.name = std::string(reader.bytes()); break;
      case 4: node.op_type = std::string(reader.bytes()); break;
      case 5: parse_attr(reader.bytes(), node); break;
      default: reader.skip(wire); break;
    }
  }
  return node;
}

// ValueInfoProto: name=1.
std::string parse_value_info_name(std::string_view blob) {
  WireReader reader(blob.data(), blob.size());
  std::uint32_t field, wire;
  std::string name;
  while (reader.next_field(field, wire)) {
    if (field == 1) name = std::string(reader.bytes());
    else reader.skip(wire);
  }
  return name;
}

// GraphProto: node=1, initializer=5, input=11, output=12.
void parse_graph(std::string_view blob, Model& model) {
  WireReader reader(blob.data(), blob.size());
  std::uint32_t field, wire;
  while (reader.next_field(field, wire)) {
    switch (field) {
      case 1: model.nodes.push_back(parse_node(reader.bytes())); break;
      case 5: {
        std::string name;
        Tensor tensor;
        // Non-float initializers (e.g. int64 shape tensors) are dropped; a
        // node that needs one fails later with a missing-input diagnostic.
        if (parse_tensor(reader.bytes(), name, tensor) && !name.empty())
          model.initializers[name] = std::move(tensor);
        break;
      }
      case 11:
        model.graph_inputs.push_back(parse_value_info_name(reader.bytes()));
        break;
      case 12:
        model.graph_outputs.push_back(parse_value_info_name(reader.bytes()));
        break;
      default: reader.skip(wire); break;
    }
  }
}

}  // namespace

Model Model::parse(const std::string& bytes) {
  Model model;
  WireReader reader(bytes.data(), bytes.size());
  std::uint32_t field, wire;
  bool saw_graph = false;
  while (reader.next_field(field, wire)) {
    if (field == 7 && wire == 2) {  // ModelProto.graph
      parse_graph(reader.bytes(), model);
      saw_graph = true;
    } else {
      reader.skip(wire);
    }
  }
  if (!saw_graph || model.nodes.empty())
    raise(Errc::inference_failure, "model file contains no graph");
  return model;
}

Model Model::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    raise(Errc::backend_unavailable, "model file missing: " + path.string());
  return parse(read_file_bytes(path.string()));
}

std::string Model::default_input() const {
  for (const auto& name : graph_inputs)
    if (!initializers.count(name)) return name;
  raise(Errc::inference_failure, "graph has no data input");
}

std::string Model::auto_capture() const {
  for (const auto& node : nodes) {
    if ((node.op_type == "GlobalAveragePool" ||
         node.op_type == "GlobalMaxPool") &&
        !node.inputs.empty())
      return node.inputs[0];
  }
  const auto& last = nodes.back();
  if (last.outputs.empty())
    raise(Errc::inference_failure, "graph tail has no output");
  return last.outputs[0];
}

// ---------------------------------------------------------------------------
// Execution

namespace {

struct Shape4 {
  std::int64_t n, c, h, w;
};

Shape4 as_nchw(const Tensor& t, const std::string& what) {
  if (t.dims.size() == 4) return {t.dims[0], t.dims[1], t.dims[2], t.dims[3]};
  if (t.dims.size() == 3) return {1, t.dims[0], t.dims[1], t.dims[2]};
  raise(Errc::inference_failure, what + " is not a 4-d tensor");
}

std::vector<std::int64_t> attr_ints(const Node& node, const char* name,
                                    std::vector<std::int64_t> fallback) {
  auto it = node.attrs.find(name);
  return it == node.attrs.end() ? fallback : it->second.ints;
}

std::int64_t attr_int(const Node& node, const char* name,
                      std::int64_t fallback) {
  auto it = node.attrs.find(name);
  return it == node.attrs.end() ? fallback : it->second.i;
}

float attr_float(const Node& node, const char* name, float fallback) {
  auto it = node.attrs.find(name);
  return it == node.attrs.end() ? fallback : it->second.f;
}

Tensor op_conv(const Node& node, const Tensor& x, const Tensor& weight,
               const Tensor* bias) {
  Shape4 in = as_nchw(x, "Conv input");
  if (weight.dims.size() != 4)
    raise(Errc::inference_failure, "Conv weight is not 4-d");
  std::int64_t m = weight.dims[0], wc = weight.dims[1];
  std::int64_t kh = weight.dims[2], kw = weight.dims[3];

  if (attr_int(node, "group", 1) != 1)
    raise(Errc::inference_failure, "grouped Conv not supported");
  for (auto d : attr_ints(node, "dilations", {1, 1}))
    if (d != 1) raise(Errc::inference_failure, "dilated Conv not supported");
  auto strides = attr_ints(node, "strides", {1, 1});
  auto pads = attr_ints(node, "pads", {0, 0, 0, 0});
  if (strides.size() != 2 || pads.size() != 4)
    raise(Errc::inference_failure, "unsupported Conv stride/pad layout");
  if (wc != in.c)
    raise(Errc::inference_failure, "Conv channel mismatch");

  std::int64_t oh = (in.h + pads[0] + pads[2] - kh) / strides[0] + 1;
  std::int64_t ow = (in.w + pads[1] + pads[3] - kw) / strides[1] + 1;
  if (oh <= 0 || ow <= 0)
    raise(Errc::inference_failure, "Conv output collapses to zero size");

  Tensor out;
  out.dims = {in.n, m, oh, ow};
  out.data.assign(out.element_count(), 0.0f);

  for (std::int64_t n = 0; n < in.n; ++n) {
    for (std::int64_t om = 0; om < m; ++om) {
      float b = bias ? bias->data[std::size_t(om)] : 0.0f;
      for (std::int64_t oy = 0; oy < oh; ++oy) {
        for (std::int64_t ox = 0; ox < ow; ++ox) {
          double acc = b;
          for (std::int64_t c = 0; c < in.c; ++c) {
            const float* xplane =
                x.data.data() + ((n * in.c + c) * in.h) * in.w;
            const float* wplane =
                weight.data.data() + ((om * wc + c) * kh) * kw;
            for (std::int64_t ky = 0; ky < kh; ++ky) {
              std::int64_t iy = oy * strides[0] - pads[0] + ky;
              if (iy < 0 || iy >= in.h) continue;
              for (std::int64_t kx = 0; kx < kw; ++kx) {
                std::int64_t ix = ox * strides[1] - pads[1] + kx;
                if (ix < 0 || ix >= in.w) continue;
                acc += double(xplane[iy * in.w + ix]) *
                       double(wplane[ky * kw + kx]);
              }
            }
          }
          out.data[std::size_t(((n * m + om) * oh + oy) * ow + ox)] =
              float(acc);
        }
      }
    }
  }
  return out;
}

Tensor op_batch_norm(const Node& node, const Tensor& x, const Tensor& scale,
                     const Tensor& shift, const Tensor& mean,
                     const Tensor& var) {
  Shape4 in = as_nchw(x, "BatchNormalization input");
  float eps = attr_float(node, "epsilon", 1e-5f);
  Tensor out = x;
  std::int64_t plane = in.h * in.w;
  for (std::int64_t n = 0; n < in.n; ++n) {
    for (std::int64_t c = 0; c < in.c; ++c) {
      float inv = 1.0f / std::sqrt(var.data[std::size_t(c)] + eps);
      float a = scale.data[std::size_t(c)] * inv;
      float b = shift.data[std::size_t(c)] - mean.data[std::size_t(c)] * a;
      float* p = out.data.data() + (n * in.c + c) * plane;
      for (std::int64_t i = 0; i < plane; ++i) p[i] = a * p[i] + b;
    }
  }
  return out;
}

Tensor op_pool(const Node& node, const Tensor& x, bool take_max) {
  Shape4 in = as_nchw(x, "pool input");
  auto kernel = attr_ints(node, "kernel_shape", {});
  if (kernel.size() != 2)
    raise(Errc::inference_failure, "pool kernel_shape missing");
  auto strides = attr_ints(node, "strides", {1, 1});
  auto pads = attr_ints(node, "pads", {0, 0, 0, 0});
  if (attr_int(node, "ceil_mode", 0) != 0)
    raise(Errc::inference_failure, "ceil_mode pooling not supported");

  std::int64_t oh = (in.h + pads[0] + pads[2] - kernel[0]) / strides[0] + 1;
  std::int64_t ow = (in.w + pads[1] + pads[3] - kernel[1]) / strides[1] + 1;
  Tensor out;
  out.dims = {in.n, in.c, oh, ow};
  out.data.assign(out.element_count(), 0.0f);

  for (std::int64_t n = 0; n < in.n; ++n) {
    for (std::int64_t c = 0; c < in.c; ++c) {
      const float* xplane = x.data.data() + (n * in.c + c) * in.h * in.w;
      float* oplane = out.data.data() + (n * in.c + c) * oh * ow;
      for (std::int64_t oy = 0; oy < oh; ++oy) {
        for (std::int64_t ox = 0; ox < ow; ++ox) {
          float best = -std::numeric_limits<float>::infinity();
          double sum = 0.0;
          std::int64_t count = 0;
          for (std::int64_t ky = 0; ky < kernel[0]; ++ky) {
            std::int64_t iy = oy * strides[0] - pads[0] + ky;
            if (iy < 0 || iy >= in.h) continue;
            for (std::int64_t kx = 0; kx < kernel[1]; ++kx) {
              std::int64_t ix = ox * strides[1] - pads[1] + kx;
              if (ix < 0 || ix >= in.w) continue;
              float v = xplane[iy * in.w + ix];
              best = std::max(best, v);
              sum += v;
              ++count;
            }
          }
          oplane[oy * ow + ox] =
              take_max ? best : float(count ? sum / double(count) : 0.0);
        }
      }
    }
  }
  return out;
}

Tensor op_global_pool(const Tensor& x, bool take_max) {
  Shape4 in = as_nchw(x, "global pool input");
  Tensor out;
  out.dims = {in.n, in.c, 1, 1};
  out.data.assign(out.element_count(), 0.0f);
  std::int64_t plane = in.h * in.w;
  for (std::int64_t n = 0; n < in.n; ++n) {
    for (std::int64_t c = 0; c < in.c; ++c) {
      const float* p = x.data.data() + (n * in.c + c) * plane;
      if (take_max) {
        float best = p[0];
        for (std::int64_t i = 1; i < plane; ++i) best = std::max(best, p[i]);
        out.data[std::size_t(n * in.c + c)] = best;
      } else {
        double sum = 0.0;
        for (std::int64_t i = 0; i < plane; ++i) sum += p[i];
        out.data[std::size_t(n * in.c + c)] = float(sum / double(plane));
      }
    }
  }
  return out;
}

}  // namespace

Tensor run_graph(const Model& model, const std::string& input_name,
                 Tensor input, const std::string& capture) {
  std::map<std::string, Tensor> values;
  values[input_name] = std::move(input);
  if (values.count(capture)) return values.at(capture);

  auto fetch = [&](const Node& node, std::size_t slot) -> const Tensor& {
    if (slot >= node.inputs.size())
      raise(Errc::inference_failure,
            node.op_type + " node missing input " + std::to_string(slot));
    const std::string& name = node.inputs[slot];
    if (auto it = values.find(name); it != values.end()) return it->second;
    if (auto it = model.initializers.find(name);
        it != model.initializers.end())
      return it->second;
    raise(Errc::inference_failure,
          "tensor " + name + " unavailable for " + node.op_type + " node");
  };

  for (const auto& node : model.nodes) {
    Tensor result;
    if (node.op_type == "Conv") {
      const Tensor* bias = node.inputs.size() > 2 ? &fetch(node, 2) : nullptr;
      result = op_conv(node, fetch(node, 0), fetch(node, 1), bias);
    } else if (node.op_type == "BatchNormalization") {
      result = op_batch_norm(node, fetch(node, 0), fetch(node, 1),
                             fetch(node, 2), fetch(node, 3), fetch(node, 4));
    } else if (node.op_type == "Relu") {
      result = fetch(node, 0);
      for (float& v : result.data) v = std::max(v, 0.0f);
    } else if (node.op_type == "MaxPool") {
      result = op_pool(node, fetch(node, 0), /*take_max=*/true);
    } else if (node.op_type == "AveragePool") {
      result = op_pool(node, fetch(node, 0), /*take_max=*/false);
    } else if (node.op_type == "GlobalMaxPool") {
      result = op_global_pool(fetch(node, 0), /*take_max=*/true);
    } else if (node.op_type == "GlobalAveragePool") {
      result = op_global_pool(fetch(node, 0), /*take_max=*/false);
    } else if (node.op_type == "Add") {
      const Tensor& a = fetch(node, 0);
      const Tensor& b = fetch(node, 1);
      if (a.dims != b.dims)
        raise(Errc::inference_failure, "Add requires equal shapes");
      result = a;
      for (std::size_t i = 0; i < result.data.size(); ++i)
        result.data[i] += b.data[i];
    } else if (node.op_type == "Identity") {
      result = fetch(node, 0);
    } else {
      raise(Errc::inference_failure,
            "unsupported op " + node.op_type + " before capture point");
    }

    if (node.outputs.empty())
      raise(Errc::inference_failure, node.op_type + " node has no output");
    values[node.outputs[0]] = std::move(result);
    if (node.outputs[0] == capture) return values.at(capture);
  }
  raise(Errc::inference_failure, "capture tensor " + capture + " never produced");
}

}  // namespace benthoscan::onnx
