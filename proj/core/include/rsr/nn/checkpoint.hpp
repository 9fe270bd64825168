// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "rsr/nn/parameter.hpp"

namespace rsr::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Named tensors as stored in an "RSRC" container:
///   magic "RSRC" | version u32 | count u32 |
///   per entry: name_len u32, UTF-8 name, rank u32, dims u32..., f32 payload
/// All integers and floats little-endian.
using NamedTensors = std::map<std::string, Tensor>;

void write_checkpoint(std::ostream& out, const ParameterList& params);
void save_checkpoint(const std::filesystem::path& path, const ParameterList& params);

NamedTensors read_checkpoint(std::istream& in);
NamedTensors load_checkpoint(const std::filesystem::path& path);

/// Copies stored values into `params` by name. Missing names or shape
/// mismatches raise DataError; extra stored entries are ignored only when
/// `allow_extra` is set.
void restore(const NamedTensors& stored, const ParameterList& params, bool allow_extra = true);

}  // namespace rsr::nn
