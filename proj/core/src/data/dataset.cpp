// SPDX-License-Identifier: Apache-2.0
#include "rsr/data/dataset.hpp"

#include <set>
#include <unordered_map>

#include "rsr/errors.hpp"

namespace rsr::data {

std::optional<std::size_t> AttributeMatrix::index_of(ClassId id) const {
  for (std::size_t i = 0; i < class_ids.size(); ++i) {
    if (class_ids[i] == id) return i;
  }
  return std::nullopt;
}

void AttributeMatrix::validate() const {
  if (class_ids.empty() || m == 0) throw InvariantError("attribute matrix is empty");
  if (values.size() != class_ids.size() * m) {
    throw InvariantError("attribute matrix holds " + std::to_string(values.size()) +
                         " values for " + std::to_string(class_ids.size()) + " x " +
                         std::to_string(m));
  }
  std::set<ClassId> ids;
  for (ClassId id : class_ids) {
    if (!ids.insert(id).second) {
      throw DuplicateClassError("attribute matrix repeats class id " + std::to_string(id));
    }
  }
  for (std::size_t r = 0; r < class_ids.size(); ++r) {
    bool nonzero = false;
    for (float v : row(r)) nonzero = nonzero || v != 0.0f;
    if (!nonzero) {
      throw InvariantError("attribute row of class " + std::to_string(class_ids[r]) + " is zero");
    }
  }
}

void Split::validate() const {
  std::set<ClassId> s, u;
  for (ClassId id : seen) {
    if (!s.insert(id).second) throw DuplicateClassError("split repeats seen class " + std::to_string(id));
  }
  for (ClassId id : unseen) {
    if (!u.insert(id).second) throw DuplicateClassError("split repeats unseen class " + std::to_string(id));
    if (s.count(id)) throw SplitOverlapError("class " + std::to_string(id) + " is both seen and unseen");
  }
}

std::optional<std::size_t> Dataset::seen_position(std::size_t class_index) const {
  const int pos = seen_position_.at(class_index);
  if (pos < 0) return std::nullopt;
  return static_cast<std::size_t>(pos);
}

Dataset Dataset::assemble(FeatureSet features, AttributeMatrix attributes, Split split) {
  attributes.validate();
  split.validate();
  if (features.feature_dim() == 0) throw InvariantError("feature shape has a zero dimension");
  if (features.features.size() != features.size() * features.feature_dim()) {
    throw InvariantError("feature payload does not match n x d1 x d2 x d3");
  }

  Dataset ds;
  std::unordered_map<ClassId, std::size_t> index;
  for (std::size_t i = 0; i < attributes.class_ids.size(); ++i) index[attributes.class_ids[i]] = i;
  ds.seen_position_.assign(attributes.num_classes(), -1);
  std::vector<bool> in_split(attributes.num_classes(), false);
  for (ClassId id : split.seen) {
    auto it = index.find(id);
    if (it == index.end()) throw UnknownClassError("split class " + std::to_string(id) + " has no attributes");
    ds.seen_position_[it->second] = static_cast<int>(ds.seen_.size());
    ds.seen_.push_back(it->second);
    in_split[it->second] = true;
  }
  for (ClassId id : split.unseen) {
    auto it = index.find(id);
    if (it == index.end()) throw UnknownClassError("split class " + std::to_string(id) + " has no attributes");
    ds.unseen_.push_back(it->second);
    in_split[it->second] = true;
  }
  ds.labels_.reserve(features.size());
  for (ClassId id : features.labels) {
    auto it = index.find(id);
    if (it == index.end() || !in_split[it->second]) {
      throw LabelMismatchError("instance label " + std::to_string(id) + " is not in the split");
    }
    ds.labels_.push_back(it->second);
  }
  ds.features_ = std::move(features);
  ds.attributes_ = std::move(attributes);
  ds.split_ = std::move(split);
  return ds;
}

}  // namespace rsr::data
