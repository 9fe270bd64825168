// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "rsr/nn/layers.hpp"

namespace rsr::grouping {

struct GroupingConfig {
  std::size_t embed_input = 0;  // h_ex length
  std::size_t m = 0;
  std::size_t k = 5;
  std::size_t embed_dim = 32;
  std::size_t hidden = 64;
  /// Fixed masks instead of f_p (rows of length m, k of them).
  std::vector<std::vector<float>> oracle_masks;

  void validate() const;
  bool oracle() const noexcept { return !oracle_masks.empty(); }
};

/// f_p: embed(h_ex) ++ a0 -> FCN -> ReLU -> FCN(k*m) -> ReLU, reshaped k x m.
/// Parameters are named "grouping.*".
class GroupingNet {
 public:
  GroupingNet() = default;
  explicit GroupingNet(const GroupingConfig& config);

  void init(nn::Rng& rng);
  const GroupingConfig& config() const noexcept { return config_; }
  std::size_t k() const noexcept { return config_.k; }
  std::size_t m() const noexcept { return config_.m; }

  /// Non-negative groups, shape {k, m}.
  template <class T>
  nn::BasicVar<T> operator()(nn::BasicVar<T> h, nn::BasicVar<T> a0) const {
    auto& tape = h.tape();
    if (config_.oracle()) return tape.constant(oracle_flat_, {config_.k, config_.m});
    auto e = nn::relu(embed_(h));
    auto z = nn::relu(hidden_(nn::concat(std::vector<nn::BasicVar<T>>{e, a0})));
    auto g = nn::relu(out_(z));
    for (T v : g.value()) {
      if (!(v >= T(0))) throw NumericError("attribute group weight is negative or NaN");
    }
    return nn::reshape(g, {config_.k, config_.m});
  }

  void collect(nn::ParameterList& out);
  nn::ParameterList parameters();

 private:
  GroupingConfig config_;
  nn::Dense embed_;
  nn::Dense hidden_;
  nn::Dense out_;
  std::vector<float> oracle_flat_;
};

/// One mask per block, 1 on the block's criteria.
std::vector<std::vector<float>> block_masks(const std::vector<std::vector<std::size_t>>& blocks, std::size_t m);

}  // namespace rsr::grouping
