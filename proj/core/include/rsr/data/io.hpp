// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>

#include "rsr/data/dataset.hpp"

namespace rsr::data {

inline constexpr std::uint32_t kFeatureFormatVersion = 1;

// Feature file "RSRF":
//   magic | version u32 | n u32 | d1 d2 d3 u32 | n labels u32 | n*d1*d2*d3 f32
// little-endian throughout.
void write_features(std::ostream& out, const FeatureSet& features);
FeatureSet read_features(std::istream& in);
void save_features(const std::filesystem::path& path, const FeatureSet& features);
FeatureSet load_features(const std::filesystem::path& path);
/// Also rejects labels outside `split` with LabelMismatchError.
FeatureSet load_features(const std::filesystem::path& path, const Split& split);

// Attribute CSV: one row per class, "class_id,v1,...,vm".
void write_attributes(std::ostream& out, const AttributeMatrix& attributes);
AttributeMatrix read_attributes(std::istream& in);
void save_attributes(const std::filesystem::path& path, const AttributeMatrix& attributes);
AttributeMatrix load_attributes(const std::filesystem::path& path);

// Split JSON: {"seen": [ids], "unseen": [ids]}.
void save_split(const std::filesystem::path& path, const Split& split);
Split parse_split(const std::string& json_text);
Split load_split(const std::filesystem::path& path);

// Manual semantic groups JSON: {"name": [criterion indices], ...}.
void save_manual_groups(const std::filesystem::path& path, const ManualGroups& groups);
ManualGroups parse_manual_groups(const std::string& json_text, std::size_t m);
ManualGroups load_manual_groups(const std::filesystem::path& path, std::size_t m);

/// File names used for a dataset directory.
struct DatasetPaths {
  std::filesystem::path features;
  std::filesystem::path attributes;
  std::filesystem::path split;
  std::filesystem::path manual_groups;

  static DatasetPaths in_directory(const std::filesystem::path& dir);
};

void save_dataset(const DatasetPaths& paths, const Dataset& dataset);
Dataset load_dataset(const DatasetPaths& paths);

}  // namespace rsr::data
