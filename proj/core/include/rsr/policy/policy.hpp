// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rsr/nn/layers.hpp"
#include "rsr/review/episode.hpp"

namespace rsr::policy {

struct PolicyConfig {
  std::size_t h_dim = 0;  // h_ex length
  std::size_t m = 0;
  std::size_t k = 5;
  std::size_t state_dim = 32;  // encoder of (h_ex, a0)
  std::size_t pred_hidden = 32;
  std::size_t pred_dim = 32;  // encoder of a^t
  std::size_t head_hidden = 64;

  void validate() const;
  std::size_t gru_dim() const noexcept { return state_dim + pred_dim; }
};

/// One actor-critic evaluation.
struct PolicyStep {
  nn::Var log_probs;  // masked log-softmax over k (-inf on used groups)
  nn::Var value;      // scalar
  nn::Var hidden;     // next recurrent state
};

/// Recurrent actor-critic: GRU over encoded e^t = {h_ex, a0, a^t}; the actor
/// is a masked softmax over k groups, the critic also sees the used mask.
/// Parameters are named "policy.*".
class PolicyNet {
 public:
  PolicyNet() = default;
  explicit PolicyNet(const PolicyConfig& config);

  void init(nn::Rng& rng);
  const PolicyConfig& config() const noexcept { return config_; }

  PolicyStep forward(nn::Tape& tape, std::span<const float> h, std::span<const float> a0, std::span<const float> at,
                     nn::Var hidden, const std::vector<bool>& used) const;
  nn::Var initial_hidden(nn::Tape& tape) const;

  void collect(nn::ParameterList& out);
  nn::ParameterList parameters();

 private:
  PolicyConfig config_;
  nn::Dense state_enc_;
  nn::Dense pred_enc1_;
  nn::Dense pred_enc2_;
  nn::GruCell gru_;
  nn::Dense actor1_;
  nn::Dense actor2_;
  nn::Dense critic1_;
  nn::Dense critic2_;
};

struct Selection {
  std::size_t action = 0;
  float log_prob = 0.0f;
  float value = 0.0f;
  std::vector<float> hidden;
  std::vector<float> probabilities;
};

/// Samples (or takes the argmax of) the masked policy. All groups used is a StateError.
Selection select(const PolicyNet& net, std::span<const float> h, std::span<const float> a0, std::span<const float> at,
                 std::span<const float> hidden, const std::vector<bool>& used, nn::Rng* rng, bool sample);

struct Transition {
  std::vector<float> h;
  std::vector<float> a0;
  std::vector<float> at;
  std::vector<bool> used;
  std::size_t action = 0;
  float log_prob = 0.0f;
  float value = 0.0f;
  float reward = 0.0f;
};

struct EpisodeRecord {
  std::vector<Transition> transitions;
  std::vector<float> returns;
  std::vector<float> advantages;
};

/// Selector backed by the policy; records transitions when `record` is set.
class PolicySelector final : public review::Selector {
 public:
  PolicySelector(const PolicyNet& net, nn::Rng* rng, bool sample, EpisodeRecord* record = nullptr)
      : net_(net), rng_(rng), sample_(sample), record_(record) {}

  std::size_t select(const review::SelectionState& state) override;
  void finish(const review::ReviewTrajectory&) override { hidden_.clear(); }

 private:
  const PolicyNet& net_;
  nn::Rng* rng_;
  bool sample_;
  EpisodeRecord* record_;
  std::vector<float> hidden_;
};

/// Per-term correct probabilities from step losses: exp(-L), capped at 1.
struct TermProbabilities {
  float loc = 0.0f;
  float oa = 0.0f;
  float jnt = 0.0f;
};
TermProbabilities term_probabilities(const review::ReviewStep& step);

/// R^t = mean(term probabilities) + p(UNI)_y.
float reward_rsr(const TermProbabilities& terms, float p_uni_target);

enum class RewardForm { per_step, episode_mean };

/// R_RSR for every step of a trajectory with targets.
std::vector<float> rsr_rewards(const review::ReviewTrajectory& trajectory, RewardForm form = RewardForm::per_step);

struct Advantages {
  std::vector<float> returns;
  std::vector<float> advantages;
};

/// A_t = sum_{i>=t} gamma^{i-t} R^i - V(e^t).
Advantages compute_advantages(std::span<const float> rewards, std::span<const float> values, float gamma);

}  // namespace rsr::policy
