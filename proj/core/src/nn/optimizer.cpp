// SPDX-License-Identifier: Apache-2.0
#include "rsr/nn/optimizer.hpp"

#include <cmath>

#include "rsr/errors.hpp"

namespace rsr::nn {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0f)) throw ConfigError("learning_rate", "must be > 0");
  if (!(momentum >= 0.0f && momentum < 1.0f)) throw ConfigError("momentum", "must lie in [0, 1)");
  if (!(weight_decay >= 0.0f)) throw ConfigError("weight_decay", "must be >= 0");
}

void sgd_step(const ParameterList& params, const OptimizerConfig& config) {
  for (const Parameter* p : params) {
    if (!p->tensor.has_grad()) throw StateError("sgd_step: parameter '" + p->name + "' has no gradient");
    for (float g : p->tensor.grad()) {
      if (!std::isfinite(g)) throw NumericError("sgd_step: non-finite gradient in '" + p->name + "'");
    }
  }
  for (Parameter* p : params) {
    auto w = p->tensor.values();
    auto g = p->tensor.grad();
    if (p->momentum.size() != w.size()) p->momentum.assign(w.size(), 0.0f);
    for (std::size_t i = 0; i < w.size(); ++i) {
      float& buf = p->momentum[i];
      buf = config.momentum * buf + (g[i] + config.weight_decay * w[i]);
      w[i] -= config.learning_rate * buf;
    }
    p->tensor.clear_grad();
  }
}

void zero_grad(const ParameterList& params) {
  for (Parameter* p : params) p->tensor.clear_grad();
}

}  // namespace rsr::nn
