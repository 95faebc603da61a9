// Minimal ONNX protobuf encoder for building fixture models in tests. The
// runner under test parses the real wire format, so the fixtures have to be
// genuine protobuf bytes.

#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace onnx_writer {

class ProtoWriter {
 public:
  const std::string& bytes() const { return out_; }

  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      out_.push_back(char(0x80 | (v & 0x7f)));
      v >>= 7;
    }
    out_.push_back(char(v));
  }
  void tag(std::uint32_t field, std::uint32_t wire) {
    varint((std::uint64_t(field) << 3) | wire);
  }
  void write_varint(std::uint32_t field, std::uint64_t v) {
    tag(field, 0);
    varint(v);
  }
  void write_bytes(std::uint32_t field, std::string_view data) {
    tag(field, 2);
    varint(data.size());
    out_.append(data);
  }
  void write_float(std::uint32_t field, float v) {
    tag(field, 5);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int i = 0; i < 4; ++i) out_.push_back(char((bits >> (8 * i)) & 0xff));
  }
  void write_packed_i64(std::uint32_t field,
                        const std::vector<std::int64_t>& values) {
    ProtoWriter inner;
    for (auto v : values) inner.varint(std::uint64_t(v));
    write_bytes(field, inner.bytes());
  }

 private:
  std::string out_;
};

// TensorProto with raw_data payload.
inline std::string tensor(const std::string& name,
                          const std::vector<std::int64_t>& dims,
                          const std::vector<float>& data) {
  ProtoWriter w;
  w.write_packed_i64(1, dims);       // dims
  w.write_varint(2, 1);              // data_type = FLOAT
  std::string raw(data.size() * 4, '\0');
  std::memcpy(raw.data(), data.data(), raw.size());
  w.write_bytes(8, name);            // name
  w.write_bytes(9, raw);             // raw_data
  return w.bytes();
}

inline std::string attr_ints(const std::string& name,
                             const std::vector<std::int64_t>& values) {
  ProtoWriter w;
  w.write_bytes(1, name);
  w.write_packed_i64(8, values);
  w.write_varint(20, 7);  // type = INTS
  return w.bytes();
}

inline std::string attr_int(const std::string& name, std::int64_t value) {
  ProtoWriter w;
  w.write_bytes(1, name);
  w.write_varint(3, std::uint64_t(value));
  w.write_varint(20, 2);  // type = INT
  return w.bytes();
}

inline std::string attr_float(const std::string& name, float value) {
  ProtoWriter w;
  w.write_bytes(1, name);
  w.write_float(2, value);
  w.write_varint(20, 1);  // type = FLOAT
  return w.bytes();
}

struct NodeSpec {
  std::string op_type;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> attrs;  // encoded AttributeProto blobs
};

inline std::string node(const NodeSpec& spec) {
  ProtoWriter w;
  for (const auto& in : spec.inputs) w.write_bytes(1, in);
  for (const auto& out : spec.outputs) w.write_bytes(2, out);
  w.write_bytes(4, spec.op_type);
  for (const auto& attr : spec.attrs) w.write_bytes(5, attr);
  return w.bytes();
}

inline std::string value_info(const std::string& name) {
  ProtoWriter w;
  w.write_bytes(1, name);
  return w.bytes();
}

class ModelBuilder {
 public:
  void add_initializer(const std::string& name,
                       const std::vector<std::int64_t>& dims,
                       const std::vector<float>& data) {
    initializers_.push_back(tensor(name, dims, data));
  }
  void add_node(NodeSpec spec) { nodes_.push_back(node(spec)); }

  std::string finish(const std::string& input_name,
                     const std::string& output_name) const {
    ProtoWriter graph;
    for (const auto& n : nodes_) graph.write_bytes(1, n);
    graph.write_bytes(2, "fixture");
    for (const auto& init : initializers_) graph.write_bytes(5, init);
    graph.write_bytes(11, value_info(input_name));
    graph.write_bytes(12, value_info(output_name));

    ProtoWriter model;
    model.write_varint(1, 7);  // ir_version
    model.write_bytes(7, graph.bytes());
    return model.bytes();
  }

 private:
  std::vector<std::string> nodes_;
  std::vector<std::string> initializers_;
};

}  // namespace onnx_writer
