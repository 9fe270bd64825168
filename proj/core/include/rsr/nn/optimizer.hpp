// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rsr/nn/parameter.hpp"

namespace rsr::nn {

struct OptimizerConfig {
  float learning_rate = 1e-3f;
  float momentum = 0.9f;
  float weight_decay = 1e-5f;

  /// Throws ConfigError when out of range.
  void validate() const;
};

/// Classic momentum SGD:
///   buf <- momentum * buf + (grad + weight_decay * w)
///   w   <- w - lr * buf
/// Gradients are cleared afterwards. Every gradient is checked before any
/// parameter moves: a missing one raises StateError, a non-finite one
/// NumericError, and in both cases nothing is updated.
void sgd_step(const ParameterList& params, const OptimizerConfig& config);

/// Drops any accumulated gradient.
void zero_grad(const ParameterList& params);

}  // namespace rsr::nn
