// SPDX-License-Identifier: Apache-2.0
#include "rsr/data/class_bank.hpp"

#include <algorithm>
#include <cmath>

#include "rsr/errors.hpp"
#include "rsr/nn/kernels.hpp"

namespace rsr::data {

ClassBank ClassBank::from(const AttributeMatrix& attributes, const std::vector<std::size_t>& classes) {
  if (classes.empty()) throw ContractError("class bank needs at least one class");
  ClassBank bank;
  bank.classes = classes;
  bank.m = attributes.m;
  bank.rows.reserve(classes.size() * attributes.m);
  for (std::size_t c : classes) {
    if (c >= attributes.num_classes()) throw ContractError("class index out of range");
    auto r = attributes.row(c);
    bank.rows.insert(bank.rows.end(), r.begin(), r.end());
    const float n = nn::kernels::norm(r);
    if (n == 0.0f) throw DegenerateError("zero attribute row for class " + std::to_string(c));
    for (float v : r) bank.unit_rows.push_back(v / n);
  }
  return bank;
}

std::optional<std::size_t> ClassBank::position_of(std::size_t class_index) const {
  auto it = std::find(classes.begin(), classes.end(), class_index);
  if (it == classes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes.begin());
}

std::vector<float> class_probabilities(std::span<const float> a, const ClassBank& bank, ProbabilityForm form) {
  if (a.size() != bank.m) throw DimensionError("prediction length does not match the class bank");
  std::vector<float> logits(bank.size());
  if (form == ProbabilityForm::cosine) {
    const float n = nn::kernels::norm(a);
    if (n == 0.0f) return std::vector<float>(bank.size(), 0.0f);
    for (std::size_t c = 0; c < bank.size(); ++c) logits[c] = nn::kernels::dot(a, bank.unit_row(c)) / n;
  } else {
    for (std::size_t c = 0; c < bank.size(); ++c) logits[c] = nn::kernels::dot(a, bank.row(c));
  }
  return nn::kernels::softmax(std::span<const float>(logits));
}

}  // namespace rsr::data
