// SPDX-License-Identifier: Apache-2.0
#include "rsr/nn/layers.hpp"

namespace rsr::nn {

Dense::Dense(std::string name, std::size_t n_in, std::size_t n_out, bool bias)
    : n_in_(n_in),
      n_out_(n_out),
      has_bias_(bias),
      weight_(name + ".weight", {n_out, n_in}),
      bias_(bias ? Parameter(name + ".bias", {n_out}) : Parameter()) {}

void Dense::init(Rng& rng) {
  weight_.init_uniform(n_in_, rng);
  if (has_bias_) bias_.init_uniform(n_in_, rng);
}

void Dense::collect(ParameterList& out) {
  out.push_back(&weight_);
  if (has_bias_) out.push_back(&bias_);
}

GruCell::GruCell(const std::string& name, std::size_t input_size, std::size_t hidden_size)
    : input_size_(input_size),
      hidden_size_(hidden_size),
      input_(name + ".input", input_size, 3 * hidden_size),
      hidden_(name + ".hidden", hidden_size, 3 * hidden_size) {}

void GruCell::init(Rng& rng) {
  input_.init(rng);
  hidden_.init(rng);
}

void GruCell::collect(ParameterList& out) {
  input_.collect(out);
  hidden_.collect(out);
}

}  // namespace rsr::nn
