// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "rsr/nn/optimizer.hpp"
#include "rsr/policy/policy.hpp"

namespace rsr::policy {

struct PpoConfig {
  float gamma = 0.99f;
  float clip_low = 0.8f;
  float clip_high = 1.2f;
  float value_weight = 0.5f;     // lambda_1
  float entropy_weight = 0.01f;  // lambda_2
  std::size_t epochs = 4;
  std::size_t buffer_transitions = 512;
  std::size_t minibatch_transitions = 64;
  bool normalize_advantages = true;  // zero mean, unit std over the buffer

  void validate() const;
};

/// min(r A, clip(r, lo, hi) A).
double clipped_surrogate(double ratio, double advantage, double lo = 0.8, double hi = 1.2);

/// Episodes collected under a frozen policy snapshot.
class RolloutBuffer {
 public:
  void add(EpisodeRecord episode);
  std::size_t transitions() const noexcept { return transitions_; }
  bool empty() const noexcept { return episodes_.empty(); }
  /// Returns-to-go and advantages for every episode.
  void finalize(float gamma, bool normalize = false);
  bool finalized() const noexcept { return finalized_; }
  const std::vector<EpisodeRecord>& episodes() const noexcept { return episodes_; }
  void clear();

 private:
  std::vector<EpisodeRecord> episodes_;
  std::size_t transitions_ = 0;
  bool finalized_ = false;
};

struct PpoStats {
  std::size_t updates = 0;
  double mean_surrogate = 0.0;
  double mean_value_loss = 0.0;
  double mean_entropy = 0.0;
};

/// 4 epochs of minibatched clipped-surrogate updates over whole episodes, the
/// recurrent state replayed in order. Clears the buffer. A NaN ratio is a NumericError.
PpoStats ppo_update(PolicyNet& net, RolloutBuffer& buffer, const PpoConfig& config,
                    const nn::OptimizerConfig& optimizer, nn::Rng& rng);

}  // namespace rsr::policy
