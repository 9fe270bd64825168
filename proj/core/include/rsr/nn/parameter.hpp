// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "rsr/nn/random.hpp"
#include "rsr/nn/tensor.hpp"

namespace rsr::nn {

/// A named learnable tensor with its momentum buffer.
///
/// `trainable == false` freezes the parameter: tapes treat it as a
/// constant and no gradient is ever accumulated into it.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Shape shape);

  std::string name;
  Tensor tensor;
  std::vector<float> momentum;
  bool trainable = true;

  /// Uniform in +-1/sqrt(fan_in).
  void init_uniform(std::size_t fan_in, Rng& rng);
  void fill(float value);
};

/// Non-owning list of parameters, as handed to the optimizer and checkpoints.
using ParameterList = std::vector<Parameter*>;

void set_trainable(const ParameterList& params, bool trainable);
/// Throws ContractError on a duplicate name.
void check_unique_names(const ParameterList& params);
/// Flat copy of every parameter value, for freeze assertions.
std::vector<std::vector<float>> snapshot(const ParameterList& params);
bool same_values(const ParameterList& params,
                 const std::vector<std::vector<float>>& before);

}  // namespace rsr::nn
