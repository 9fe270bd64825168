// SPDX-License-Identifier: Apache-2.0
#include "rsr/nn/checkpoint.hpp"

#include <fstream>
#include <set>

#include "rsr/errors.hpp"
#include "rsr/nn/binary_io.hpp"

namespace rsr::nn {

namespace {
// Bounds on header fields, so a corrupt count cannot trigger a huge allocation.
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxRank = 8;
}  // namespace

void write_checkpoint(std::ostream& out, const ParameterList& params) {
  check_unique_names(params);
  binary::write_bytes(out, "RSRC");
  binary::write_u32(out, kCheckpointVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    binary::write_u32(out, static_cast<std::uint32_t>(p->name.size()));
    binary::write_bytes(out, p->name);
    const Shape& shape = p->tensor.shape();
    binary::write_u32(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) binary::write_u32(out, static_cast<std::uint32_t>(d));
    for (float v : p->tensor.values()) binary::write_f32(out, v);
  }
}

void save_checkpoint(const std::filesystem::path& path, const ParameterList& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path.string());
  write_checkpoint(out, params);
  if (!out) throw DataError("failed writing checkpoint: " + path.string());
}

NamedTensors read_checkpoint(std::istream& in) {
  binary::expect_magic(in, "RSRC");
  const std::uint32_t version = binary::read_u32(in, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = binary::read_u32(in, "parameter count");
  NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = binary::read_u32(in, "name length");
    if (name_len > kMaxNameLength) throw DataError("checkpoint name length out of range");
    std::string name(name_len, '\0');
    binary::read_exact(in, name.data(), name_len, "parameter name");
    const std::uint32_t rank = binary::read_u32(in, "rank");
    if (rank > kMaxRank) throw DataError("checkpoint rank out of range for '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) d = binary::read_u32(in, "dimension");
    std::vector<float> values(shape_size(shape));
    for (float& v : values) v = binary::read_f32(in, "payload");
    if (!out.emplace(name, Tensor(shape, std::move(values))).second) {
      throw DataError("checkpoint repeats parameter '" + name + "'");
    }
  }
  return out;
}

NamedTensors load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  return read_checkpoint(in);
}

void restore(const NamedTensors& stored, const ParameterList& params, bool allow_extra) {
  std::set<std::string> used;
  for (Parameter* p : params) {
    auto it = stored.find(p->name);
    if (it == stored.end()) throw DataError("checkpoint lacks parameter '" + p->name + "'");
    if (it->second.shape() != p->tensor.shape()) {
      throw DataError("checkpoint shape " + shape_string(it->second.shape()) + " for '" + p->name +
                      "' does not match model shape " + shape_string(p->tensor.shape()));
    }
    p->tensor.storage() = it->second.storage();
    p->momentum.assign(p->tensor.size(), 0.0f);
    p->tensor.clear_grad();
    used.insert(p->name);
  }
  if (!allow_extra && used.size() != stored.size()) {
    throw DataError("checkpoint holds parameters the model does not define");
  }
}

}  // namespace rsr::nn
