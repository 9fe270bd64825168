// SPDX-License-Identifier: Apache-2.0
#include "rsr/policy/policy.hpp"

#include <algorithm>
#include <cmath>

#include "rsr/errors.hpp"
#include "rsr/nn/kernels.hpp"

namespace rsr::policy {

void PolicyConfig::validate() const {
  if (h_dim == 0) throw ConfigError("feature_dim", "must be >= 1");
  if (m == 0) throw ConfigError("m", "must be >= 1");
  if (k == 0) throw ConfigError("k", "must be >= 1");
  if (state_dim == 0 || pred_hidden == 0 || pred_dim == 0 || head_hidden == 0) {
    throw ConfigError("policy_hidden", "policy widths must be >= 1");
  }
}

PolicyNet::PolicyNet(const PolicyConfig& config)
    : config_(config),
      state_enc_("policy.state", config.h_dim + config.m, config.state_dim),
      pred_enc1_("policy.pred1", config.m, config.pred_hidden),
      pred_enc2_("policy.pred2", config.pred_hidden, config.pred_dim),
      gru_("policy.gru", config.gru_dim(), config.gru_dim()),
      actor1_("policy.actor1", config.gru_dim(), config.head_hidden),
      actor2_("policy.actor2", config.head_hidden, config.k),
      critic1_("policy.critic1", config.gru_dim() + config.k, config.head_hidden),
      critic2_("policy.critic2", config.head_hidden, 1) {
  config_.validate();
}

void PolicyNet::init(nn::Rng& rng) {
  state_enc_.init(rng);
  pred_enc1_.init(rng);
  pred_enc2_.init(rng);
  gru_.init(rng);
  actor1_.init(rng);
  actor2_.init(rng);
  critic1_.init(rng);
  critic2_.init(rng);
}

void PolicyNet::collect(nn::ParameterList& out) {
  state_enc_.collect(out);
  pred_enc1_.collect(out);
  pred_enc2_.collect(out);
  gru_.collect(out);
  actor1_.collect(out);
  actor2_.collect(out);
  critic1_.collect(out);
  critic2_.collect(out);
}

nn::ParameterList PolicyNet::parameters() {
  nn::ParameterList out;
  collect(out);
  return out;
}

nn::Var PolicyNet::initial_hidden(nn::Tape& tape) const {
  return tape.constant(std::vector<float>(config_.gru_dim(), 0.0f));
}

PolicyStep PolicyNet::forward(nn::Tape& tape, std::span<const float> h, std::span<const float> a0,
                              std::span<const float> at, nn::Var hidden, const std::vector<bool>& used) const {
  if (used.size() != config_.k) throw DimensionError("policy: used mask length must be k");
  std::vector<float> ha(h.begin(), h.end());
  ha.insert(ha.end(), a0.begin(), a0.end());
  auto s = state_enc_(tape.constant(std::move(ha)));
  auto p = pred_enc2_(nn::relu(pred_enc1_(tape.constant(at))));
  auto next = gru_(nn::concat(std::vector<nn::Var>{s, p}), hidden);

  std::vector<bool> allowed(used.size());
  std::vector<float> mask(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) {
    allowed[i] = !used[i];
    mask[i] = used[i] ? 1.0f : 0.0f;
  }
  auto logits = actor2_(nn::relu(actor1_(next)));
  auto log_probs = nn::masked_log_softmax(logits, allowed);
  auto value = critic2_(nn::relu(critic1_(nn::concat(std::vector<nn::Var>{next, tape.constant(std::move(mask))}))));
  return {log_probs, value, next};
}

Selection select(const PolicyNet& net, std::span<const float> h, std::span<const float> a0, std::span<const float> at,
                 std::span<const float> hidden, const std::vector<bool>& used, nn::Rng* rng, bool sample) {
  if (std::all_of(used.begin(), used.end(), [](bool u) { return u; })) {
    throw StateError("every attribute group is already used");
  }
  nn::Tape tape(false);
  nn::Var hv = hidden.empty() ? net.initial_hidden(tape) : tape.constant(hidden);
  auto step = net.forward(tape, h, a0, at, hv, used);
  const auto& lp = step.log_probs.value();
  Selection out;
  out.probabilities.resize(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) out.probabilities[i] = used[i] ? 0.0f : std::exp(lp[i]);
  if (sample) {
    if (rng == nullptr) throw StateError("sampling a policy needs an Rng");
    const float u = rng->uniform(0.0f, 1.0f);
    float acc = 0.0f;
    out.action = lp.size();
    std::size_t last_free = 0;
    for (std::size_t i = 0; i < lp.size(); ++i) {
      if (used[i]) continue;
      last_free = i;
      acc += out.probabilities[i];
      if (u < acc) {
        out.action = i;
        break;
      }
    }
    if (out.action == lp.size()) out.action = last_free;  // rounding at the top end
  } else {
    out.action = nn::kernels::argmax(std::span<const float>(lp));
  }
  out.log_prob = lp[out.action];
  out.value = step.value.item();
  out.hidden = step.hidden.value();
  return out;
}

std::size_t PolicySelector::select(const review::SelectionState& state) {
  if (state.step == 0) hidden_.clear();
  auto s = policy::select(net_, state.h, state.a0, state.at, hidden_, *state.used, rng_, sample_);
  hidden_ = std::move(s.hidden);
  if (record_ != nullptr) {
    Transition tr;
    tr.h.assign(state.h.begin(), state.h.end());
    tr.a0.assign(state.a0.begin(), state.a0.end());
    tr.at.assign(state.at.begin(), state.at.end());
    tr.used = *state.used;
    tr.action = s.action;
    tr.log_prob = s.log_prob;
    tr.value = s.value;
    record_->transitions.push_back(std::move(tr));
  }
  return s.action;
}

TermProbabilities term_probabilities(const review::ReviewStep& step) {
  auto p = [](float loss) { return std::min(1.0f, std::exp(-loss)); };
  return {p(step.loss_loc), p(step.loss_oa), p(step.loss_jnt)};
}

float reward_rsr(const TermProbabilities& terms, float p_uni_target) {
  return (terms.loc + terms.oa + terms.jnt) / 3.0f + p_uni_target;
}

std::vector<float> rsr_rewards(const review::ReviewTrajectory& trajectory, RewardForm form) {
  std::vector<float> r;
  for (const auto& s : trajectory.steps) r.push_back(reward_rsr(term_probabilities(s), s.p_uni_target));
  if (form == RewardForm::episode_mean && !r.empty()) {
    float mean = 0.0f;
    for (float v : r) mean += v;
    mean /= static_cast<float>(r.size());
    std::fill(r.begin(), r.end(), mean);
  }
  return r;
}

Advantages compute_advantages(std::span<const float> rewards, std::span<const float> values, float gamma) {
  if (rewards.empty()) throw ContractError("advantages of an empty episode");
  if (rewards.size() != values.size()) throw DimensionError("one value estimate per reward expected");
  Advantages out;
  out.returns.resize(rewards.size());
  out.advantages.resize(rewards.size());
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + static_cast<double>(gamma) * acc;
    out.returns[t] = static_cast<float>(acc);
    out.advantages[t] = static_cast<float>(acc - values[t]);
  }
  return out;
}

}  // namespace rsr::policy
