// SPDX-License-Identifier: Apache-2.0
#include "rsr/adversarial/adversarial.hpp"

#include <algorithm>
#include <cmath>

#include "rsr/errors.hpp"

namespace rsr::adversarial {

Discriminator::Discriminator(std::size_t m, std::size_t hidden)
    : hidden_("adv.hidden", m, hidden), out_("adv.out", hidden, 1) {}

void Discriminator::init(nn::Rng& rng) {
  hidden_.init(rng);
  out_.init(rng);
}

float Discriminator::score(std::span<const float> a) const {
  nn::Tape tape(false);
  return (*this)(tape.constant(a)).item();
}

void Discriminator::collect(nn::ParameterList& out) {
  hidden_.collect(out);
  out_.collect(out);
}

nn::ParameterList Discriminator::parameters() {
  nn::ParameterList out;
  collect(out);
  return out;
}

double adversarial_value(std::span<const float> real_scores, std::span<const float> fake_scores, float alpha) {
  if (real_scores.size() != fake_scores.size() || real_scores.empty()) {
    throw DimensionError("adversarial value needs one real score per fake score");
  }
  auto safe = [](double x) { return std::log(std::clamp(x, static_cast<double>(kLogFloor), 1.0)); };
  double total = 0.0, w = 1.0;
  for (std::size_t t = 0; t < real_scores.size(); ++t) {
    total += w * (safe(real_scores[t]) + safe(1.0 - fake_scores[t]));
    w *= alpha;
  }
  return total;
}

nn::Var generator_loss(const Discriminator& dis, const std::vector<nn::Var>& revised,
                       const std::vector<std::vector<float>>& real, nn::Var classifier_loss, float alpha) {
  if (revised.size() != real.size()) throw DimensionError("one real attribute per step expected");
  auto& tape = classifier_loss.tape();
  std::vector<nn::Var> real_scores, fake_scores;
  for (std::size_t t = 0; t < revised.size(); ++t) {
    real_scores.push_back(dis(tape.constant(std::span<const float>(real[t]))));
    fake_scores.push_back(dis(revised[t]));
  }
  return nn::add(adversarial_objective(real_scores, fake_scores, alpha), classifier_loss);
}

nn::Var discriminator_loss(nn::Tape& tape, const Discriminator& dis, const std::vector<std::vector<float>>& fake,
                           const std::vector<std::vector<float>>& real, float alpha) {
  if (fake.size() != real.size()) throw DimensionError("one real attribute per step expected");
  std::vector<nn::Var> real_scores, fake_scores;
  for (std::size_t t = 0; t < fake.size(); ++t) {
    real_scores.push_back(dis(tape.constant(std::span<const float>(real[t]))));
    fake_scores.push_back(dis(tape.constant(std::span<const float>(fake[t]))));
  }
  return nn::scale(adversarial_objective(real_scores, fake_scores, alpha), -1.0f);
}

AdversarialRewards rewards_adversarial(float r_rsr, float d_score) { return {1.0f - d_score, r_rsr + d_score}; }

}  // namespace rsr::adversarial
