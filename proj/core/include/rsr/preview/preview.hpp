// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rsr/data/class_bank.hpp"
#include "rsr/nn/layers.hpp"

namespace rsr::preview {

struct PreviewConfig {
  std::size_t feature_dim = 0;
  std::size_t m = 0;
  /// 0 keeps the extractor a pass-through over precomputed features.
  std::size_t extractor_dim = 0;
  /// 0 gives the single-layer classifier; otherwise FCN(hidden)-FCN(m).
  std::size_t classifier_hidden = 0;
  bool classifier_bias = true;
  float keep_rate = 0.5f;

  void validate() const;
  std::size_t embed_dim() const noexcept { return extractor_dim == 0 ? feature_dim : extractor_dim; }
};

/// f_ex and f_c. Parameters are named "preview.*".
class PreviewModel {
 public:
  PreviewModel() = default;
  explicit PreviewModel(const PreviewConfig& config);

  void init(nn::Rng& rng);
  const PreviewConfig& config() const noexcept { return config_; }

  /// h_ex for one instance row.
  template <class T>
  nn::BasicVar<T> extract(nn::BasicTape<T>& tape, std::span<const float> x) const {
    if (x.size() != config_.feature_dim) throw DimensionError("extract: feature length mismatch");
    auto in = tape.constant(x);
    if (!extractor_) return in;
    return nn::relu((*extractor_)(in));
  }

  /// a0 = f_c(h_ex); dropout applies only when `training`.
  template <class T>
  nn::BasicVar<T> predict(nn::BasicVar<T> h, nn::Rng* rng, bool training) const {
    auto x = h;
    if (hidden_) x = (*hidden_)(x);
    x = classifier_(x);
    return nn::dropout(x, config_.keep_rate, rng, training);
  }

  void collect(nn::ParameterList& out);
  nn::ParameterList parameters();
  nn::ParameterList extractor_parameters();

 private:
  PreviewConfig config_;
  std::optional<nn::Dense> extractor_;
  std::optional<nn::Dense> hidden_;
  nn::Dense classifier_;
};

/// Compatibility scores a^T phi(y) over every class of the bank.
template <class T>
nn::BasicVar<T> compatibility(nn::BasicVar<T> a, nn::BasicVar<T> bank_matrix) {
  return nn::dense(a, bank_matrix);
}

/// Cross-entropy over compatibility scores; `target` is a bank position.
template <class T>
nn::BasicVar<T> loss_pre(nn::BasicVar<T> a0, std::size_t target, nn::BasicVar<T> bank_matrix) {
  return nn::cross_entropy(compatibility(a0, bank_matrix), target);
}

/// Frozen-model outputs reused across review steps.
struct PreviewOutputs {
  std::vector<float> h;
  std::vector<float> a0;
};

/// Eval-mode h_ex and a0 for every instance, computed once.
class PreviewCache {
 public:
  PreviewCache() = default;
  PreviewCache(const PreviewModel& model, const data::Dataset& dataset);

  const PreviewOutputs& operator[](std::size_t instance) const { return entries_.at(instance); }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<PreviewOutputs> entries_;
};

}  // namespace rsr::preview
