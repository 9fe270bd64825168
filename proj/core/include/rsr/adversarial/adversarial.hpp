// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "rsr/nn/layers.hpp"

namespace rsr::adversarial {

inline constexpr float kLogFloor = 1e-7f;

/// f_dis: m -> hidden -> 1, sigmoid. Parameters are named "adv.*".
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(std::size_t m, std::size_t hidden = 256);

  void init(nn::Rng& rng);

  template <class T>
  nn::BasicVar<T> operator()(nn::BasicVar<T> a) const {
    if (a.size() != hidden_.in_features()) throw DimensionError("discriminator: input length must be m");
    return nn::sigmoid(out_(nn::relu(hidden_(a))));
  }
  /// Realness score of a plain vector.
  float score(std::span<const float> a) const;

  void collect(nn::ParameterList& out);
  nn::ParameterList parameters();

 private:
  nn::Dense hidden_;
  nn::Dense out_;
};

/// log clamp(x, 1e-7, 1).
template <class T>
nn::BasicVar<T> safe_log(nn::BasicVar<T> x) {
  return nn::log(nn::clamp(x, T(kLogFloor), T(1)));
}

/// sum_t alpha^{t-1} [log D(real_t) + log(1 - D(fake_t))], the quantity the
/// discriminator maximizes and the generator minimizes.
template <class T>
nn::BasicVar<T> adversarial_objective(const std::vector<nn::BasicVar<T>>& real_scores,
                                      const std::vector<nn::BasicVar<T>>& fake_scores, float alpha) {
  if (real_scores.size() != fake_scores.size() || real_scores.empty()) {
    throw DimensionError("adversarial objective needs one real score per fake score");
  }
  std::vector<nn::BasicVar<T>> terms;
  T w = T(1);
  for (std::size_t t = 0; t < real_scores.size(); ++t) {
    auto one_minus = nn::add_scalar(nn::scale(fake_scores[t], T(-1)), T(1));
    terms.push_back(nn::scale(nn::add(safe_log(real_scores[t]), safe_log(one_minus)), w));
    w *= static_cast<T>(alpha);
  }
  return nn::add_n(terms);
}

/// Plain-number version of the same sum.
double adversarial_value(std::span<const float> real_scores, std::span<const float> fake_scores, float alpha);

/// Generator side of the A-RSR objective for one episode: the adversarial
/// sum over the tape's a^t plus the auxiliary classifier loss.
nn::Var generator_loss(const Discriminator& dis, const std::vector<nn::Var>& revised,
                       const std::vector<std::vector<float>>& real, nn::Var classifier_loss, float alpha);

/// Discriminator side: minus the adversarial sum, with a^t given as plain
/// (detached) values on a fresh tape.
nn::Var discriminator_loss(nn::Tape& tape, const Discriminator& dis, const std::vector<std::vector<float>>& fake,
                           const std::vector<std::vector<float>>& real, float alpha);

struct AdversarialRewards {
  float dis = 0.0f;   // 1 - D(a)
  float arsr = 0.0f;  // R_RSR + D(a)
};

AdversarialRewards rewards_adversarial(float r_rsr, float d_score);

}  // namespace rsr::adversarial
