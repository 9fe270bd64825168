// SPDX-License-Identifier: Apache-2.0
#include "rsr/policy/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsr/errors.hpp"

namespace rsr::policy {

void PpoConfig::validate() const {
  if (!(gamma > 0.0f && gamma < 1.0f)) throw ConfigError("gamma", "must be in (0, 1)");
  if (!(clip_low > 0.0f && clip_low <= 1.0f && clip_high >= 1.0f)) {
    throw ConfigError("ppo_clip", "clip range must contain 1");
  }
  if (value_weight < 0.0f) throw ConfigError("ppo_value_weight", "must be >= 0");
  if (entropy_weight < 0.0f) throw ConfigError("ppo_entropy_weight", "must be >= 0");
  if (epochs == 0) throw ConfigError("ppo_epochs", "must be >= 1");
  if (buffer_transitions == 0) throw ConfigError("ppo_buffer_transitions", "must be >= 1");
  if (minibatch_transitions == 0) throw ConfigError("ppo_minibatch_transitions", "must be >= 1");
}

double clipped_surrogate(double ratio, double advantage, double lo, double hi) {
  return std::min(ratio * advantage, std::clamp(ratio, lo, hi) * advantage);
}

void RolloutBuffer::add(EpisodeRecord episode) {
  if (episode.transitions.empty()) throw ContractError("empty episode added to the rollout buffer");
  transitions_ += episode.transitions.size();
  episodes_.push_back(std::move(episode));
  finalized_ = false;
}

void RolloutBuffer::finalize(float gamma, bool normalize) {
  for (auto& ep : episodes_) {
    std::vector<float> r, v;
    for (const auto& t : ep.transitions) {
      r.push_back(t.reward);
      v.push_back(t.value);
    }
    auto adv = compute_advantages(r, v, gamma);
    ep.returns = std::move(adv.returns);
    ep.advantages = std::move(adv.advantages);
  }
  if (normalize && transitions_ > 1) {
    double sum = 0.0, sq = 0.0;
    for (const auto& ep : episodes_) {
      for (float a : ep.advantages) {
        sum += a;
        sq += static_cast<double>(a) * a;
      }
    }
    const double n = static_cast<double>(transitions_);
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(sq / n - mean * mean, 0.0));
    if (sd > 1e-8) {
      for (auto& ep : episodes_) {
        for (float& a : ep.advantages) a = static_cast<float>((a - mean) / sd);
      }
    }
  }
  finalized_ = true;
}

void RolloutBuffer::clear() {
  episodes_.clear();
  transitions_ = 0;
  finalized_ = false;
}

PpoStats ppo_update(PolicyNet& net, RolloutBuffer& buffer, const PpoConfig& config,
                    const nn::OptimizerConfig& optimizer, nn::Rng& rng) {
  if (buffer.empty()) throw ContractError("ppo update on an empty buffer");
  if (!buffer.finalized()) throw StateError("advantages must be computed before the update");
  const auto& episodes = buffer.episodes();
  auto params = net.parameters();
  PpoStats stats;
  std::size_t seen = 0;

  std::vector<std::size_t> order(episodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    std::size_t pos = 0;
    while (pos < order.size()) {
      // Whole episodes until the minibatch holds enough transitions.
      std::vector<std::size_t> batch;
      std::size_t count = 0;
      while (pos < order.size() && count < config.minibatch_transitions) {
        batch.push_back(order[pos]);
        count += episodes[order[pos]].transitions.size();
        ++pos;
      }
      nn::zero_grad(params);
      const float inv = 1.0f / static_cast<float>(count);
      for (std::size_t e : batch) {
        const auto& ep = episodes[e];
        nn::Tape tape;
        nn::Var hidden = net.initial_hidden(tape);
        std::vector<nn::Var> terms;
        for (std::size_t t = 0; t < ep.transitions.size(); ++t) {
          const auto& tr = ep.transitions[t];
          auto step = net.forward(tape, tr.h, tr.a0, tr.at, hidden, tr.used);
          hidden = step.hidden;
          auto logp = nn::pick(step.log_probs, tr.action);
          auto ratio = nn::exp(nn::add_scalar(logp, -tr.log_prob));
          if (!std::isfinite(ratio.item())) {
            throw NumericError("ppo: non-finite probability ratio at transition " + std::to_string(t));
          }
          const float adv = ep.advantages[t];
          auto surrogate = nn::minimum(nn::scale(ratio, adv),
                                       nn::scale(nn::clamp(ratio, config.clip_low, config.clip_high), adv));
          auto err = nn::add_scalar(step.value, -ep.returns[t]);
          auto value_loss = nn::mul(err, err);
          // Entropy over the allowed actions only; used ones sit at -inf.
          std::vector<nn::Var> ent_terms;
          for (std::size_t i = 0; i < tr.used.size(); ++i) {
            if (tr.used[i]) continue;
            auto li = nn::pick(step.log_probs, i);
            ent_terms.push_back(nn::mul(nn::exp(li), li));
          }
          auto entropy = nn::scale(nn::add_n(ent_terms), -1.0f);
          stats.mean_surrogate += surrogate.item();
          stats.mean_value_loss += value_loss.item();
          stats.mean_entropy += entropy.item();
          ++seen;
          // Loss = -(surrogate - l1 * mse + l2 * entropy).
          terms.push_back(nn::add_n(std::vector<nn::Var>{nn::scale(surrogate, -inv),
                                                         nn::scale(value_loss, config.value_weight * inv),
                                                         nn::scale(entropy, -config.entropy_weight * inv)}));
        }
        tape.backward(nn::add_n(terms));
      }
      for (nn::Parameter* p : params) p->tensor.ensure_grad();
      nn::sgd_step(params, optimizer);
      ++stats.updates;
    }
  }
  if (seen > 0) {
    stats.mean_surrogate /= static_cast<double>(seen);
    stats.mean_value_loss /= static_cast<double>(seen);
    stats.mean_entropy /= static_cast<double>(seen);
  }
  buffer.clear();
  return stats;
}

}  // namespace rsr::policy
