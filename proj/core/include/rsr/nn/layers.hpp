// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "rsr/nn/ops.hpp"
#include "rsr/nn/parameter.hpp"

namespace rsr::nn {

/// Fully-connected layer owning its weight [n_out x n_in] and optional bias.
class Dense {
 public:
  Dense() = default;
  Dense(std::string name, std::size_t n_in, std::size_t n_out, bool bias = true);

  void init(Rng& rng);

  template <class T>
  BasicVar<T> operator()(BasicVar<T> x) const {
    auto& tape = x.tape();
    auto w = tape.param(weight_);
    if (!has_bias_) return dense(x, w);
    return dense(x, w, std::optional<BasicVar<T>>(tape.param(bias_)));
  }

  std::size_t in_features() const noexcept { return n_in_; }
  std::size_t out_features() const noexcept { return n_out_; }
  bool has_bias() const noexcept { return has_bias_; }

  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }
  void collect(ParameterList& out);

 private:
  std::size_t n_in_ = 0;
  std::size_t n_out_ = 0;
  bool has_bias_ = true;
  // mutable: the tape reads parameters through non-const references.
  mutable Parameter weight_;
  mutable Parameter bias_;
};

/// Gate activations of one GRU step, for inspection.
struct GruGates {
  std::vector<float> reset;
  std::vector<float> update;
  std::vector<float> candidate;
};

/// Gated recurrent unit (reset gate r, update gate z, candidate n):
///   r  = sig(W_ir x + b_ir + W_hr h + b_hr)
///   z  = sig(W_iz x + b_iz + W_hz h + b_hz)
///   n  = tanh(W_in x + b_in + r * (W_hn h + b_hn))
///   h' = (1 - z) * n + z * h
class GruCell {
 public:
  GruCell() = default;
  GruCell(const std::string& name, std::size_t input_size, std::size_t hidden_size);

  void init(Rng& rng);

  template <class T>
  BasicVar<T> operator()(BasicVar<T> x, BasicVar<T> h, GruGates* gates = nullptr) const {
    if (x.size() != input_size_ || h.size() != hidden_size_) {
      throw DimensionError("gru_cell: expected input " + std::to_string(input_size_) +
                           " and hidden " + std::to_string(hidden_size_) + ", got " +
                           std::to_string(x.size()) + " and " + std::to_string(h.size()));
    }
    const std::size_t H = hidden_size_;
    auto gi = input_(x);
    auto gh = hidden_(h);
    auto r = sigmoid(add(slice(gi, 0, H), slice(gh, 0, H)));
    auto z = sigmoid(add(slice(gi, H, H), slice(gh, H, H)));
    auto n = tanh(add(slice(gi, 2 * H, H), mul(r, slice(gh, 2 * H, H))));
    // h' = n + z * (h - n)
    auto out = add(n, mul(z, sub(h, n)));
    if (gates != nullptr) {
      gates->reset.assign(r.value().begin(), r.value().end());
      gates->update.assign(z.value().begin(), z.value().end());
      gates->candidate.assign(n.value().begin(), n.value().end());
    }
    return out;
  }

  std::size_t input_size() const noexcept { return input_size_; }
  std::size_t hidden_size() const noexcept { return hidden_size_; }
  /// Rows [r; z; n] of the stacked input/hidden projections.
  Dense& input_projection() noexcept { return input_; }
  Dense& hidden_projection() noexcept { return hidden_; }
  void collect(ParameterList& out);

 private:
  std::size_t input_size_ = 0;
  std::size_t hidden_size_ = 0;
  Dense input_;
  Dense hidden_;
};

}  // namespace rsr::nn
