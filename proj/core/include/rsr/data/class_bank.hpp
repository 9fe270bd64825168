// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rsr/data/dataset.hpp"
#include "rsr/nn/tape.hpp"

namespace rsr::data {

/// Attribute rows of a candidate class set, in a fixed order.
struct ClassBank {
  std::vector<std::size_t> classes;  // dense class indices
  std::size_t m = 0;
  std::vector<float> rows;       // classes.size() x m
  std::vector<float> unit_rows;  // rows scaled to unit norm

  static ClassBank from(const AttributeMatrix& attributes, const std::vector<std::size_t>& classes);

  std::size_t size() const noexcept { return classes.size(); }
  std::span<const float> row(std::size_t position) const {
    return std::span<const float>(rows).subspan(position * m, m);
  }
  std::span<const float> unit_row(std::size_t position) const {
    return std::span<const float>(unit_rows).subspan(position * m, m);
  }
  std::optional<std::size_t> position_of(std::size_t class_index) const;

  /// The bank as a constant [size x m] matrix, for dense(a, matrix) scores.
  template <class T>
  nn::BasicVar<T> matrix(nn::BasicTape<T>& tape) const {
    return tape.constant(std::span<const float>(rows), {size(), m});
  }
};

enum class ProbabilityForm { cosine, dot };

/// Class distribution of a prediction over the bank: softmax of cosine
/// similarities (or raw dot products). A zero vector yields all zeros.
std::vector<float> class_probabilities(std::span<const float> a, const ClassBank& bank,
                                       ProbabilityForm form = ProbabilityForm::cosine);

}  // namespace rsr::data
