// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rsr::data {

using ClassId = std::uint32_t;

/// Per-class semantic descriptors; row r is phi(class_ids[r]).
struct AttributeMatrix {
  std::vector<ClassId> class_ids;
  std::size_t m = 0;
  std::vector<float> values;  // row-major |Y| x m

  std::size_t num_classes() const noexcept { return class_ids.size(); }
  std::span<const float> row(std::size_t index) const {
    return std::span<const float>(values).subspan(index * m, m);
  }
  std::optional<std::size_t> index_of(ClassId id) const;

  /// Duplicate ids -> DuplicateClassError; ragged/empty -> InvariantError;
  /// an all-zero row -> InvariantError.
  void validate() const;
};

struct Split {
  std::vector<ClassId> seen;
  std::vector<ClassId> unseen;

  /// Overlap -> SplitOverlapError; repeated id -> DuplicateClassError.
  void validate() const;
};

/// Raw instance features as stored on disk; labels are original class ids.
struct FeatureSet {
  std::array<std::uint32_t, 3> feature_shape{1, 1, 0};
  std::vector<float> features;  // n x d1 x d2 x d3
  std::vector<ClassId> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_dim() const noexcept {
    return std::size_t{feature_shape[0]} * feature_shape[1] * feature_shape[2];
  }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(features).subspan(i * feature_dim(), feature_dim());
  }
};

/// Features, attributes and split cross-validated, with dense 0-based class
/// indices (rows of the attribute matrix).
class Dataset {
 public:
  /// Validates all three parts and their cross references.
  static Dataset assemble(FeatureSet features, AttributeMatrix attributes, Split split);

  const FeatureSet& features() const noexcept { return features_; }
  const AttributeMatrix& attributes() const noexcept { return attributes_; }
  const Split& split() const noexcept { return split_; }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t m() const noexcept { return attributes_.m; }
  std::size_t feature_dim() const noexcept { return features_.feature_dim(); }
  /// Dense class index of instance i.
  std::size_t label(std::size_t i) const { return labels_[i]; }
  std::span<const float> instance(std::size_t i) const { return features_.row(i); }

  const std::vector<std::size_t>& seen_classes() const noexcept { return seen_; }
  const std::vector<std::size_t>& unseen_classes() const noexcept { return unseen_; }
  bool is_seen(std::size_t class_index) const { return seen_position_[class_index] >= 0; }
  /// Position of a dense class index within seen_classes(), if seen.
  std::optional<std::size_t> seen_position(std::size_t class_index) const;

 private:
  FeatureSet features_;
  AttributeMatrix attributes_;
  Split split_;
  std::vector<std::size_t> labels_;
  std::vector<std::size_t> seen_;
  std::vector<std::size_t> unseen_;
  std::vector<int> seen_position_;
};

/// Named lists of attribute criterion indices (human semantic groups).
using ManualGroups = std::vector<std::pair<std::string, std::vector<std::size_t>>>;

}  // namespace rsr::data
