// SPDX-License-Identifier: Apache-2.0
#include "rsr/nn/parameter.hpp"

#include <cmath>
#include <set>

#include "rsr/errors.hpp"

namespace rsr::nn {

Parameter::Parameter(std::string name_, Shape shape)
    : name(std::move(name_)), tensor(std::move(shape)), momentum(tensor.size(), 0.0f) {}

void Parameter::init_uniform(std::size_t fan_in, Rng& rng) {
  const float bound = 1.0f / std::sqrt(static_cast<float>(fan_in == 0 ? 1 : fan_in));
  for (float& v : tensor.values()) v = rng.uniform(-bound, bound);
}

void Parameter::fill(float value) {
  for (float& v : tensor.values()) v = value;
}

void set_trainable(const ParameterList& params, bool trainable) {
  for (Parameter* p : params) p->trainable = trainable;
}

void check_unique_names(const ParameterList& params) {
  std::set<std::string> seen;
  for (const Parameter* p : params) {
    if (!seen.insert(p->name).second) {
      throw ContractError("duplicate parameter name '" + p->name + "'");
    }
  }
}

std::vector<std::vector<float>> snapshot(const ParameterList& params) {
  std::vector<std::vector<float>> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back(p->tensor.storage());
  return out;
}

bool same_values(const ParameterList& params,
                 const std::vector<std::vector<float>>& before) {
  if (params.size() != before.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!bitwise_equal(params[i]->tensor.values(), before[i])) return false;
  }
  return true;
}

}  // namespace rsr::nn
