// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "rsr/pipeline/model.hpp"

namespace rsr::pipeline {

struct StageOneResult {
  std::vector<double> preview_loss;      // mean L_PRE per epoch
  std::vector<double> review_loss;       // mean L_REV per epoch (RSR review phase)
  std::vector<double> adversarial_loss;  // mean generator loss per epoch (A-RSR phase)
  std::vector<double> discriminator_loss;
};

struct StageTwoResult {
  std::vector<double> round_reward;  // mean per-step reward of each PPO round
  std::vector<double> round_length;  // mean episode length of each round
  std::size_t updates = 0;         // ppo_update calls, one per filled buffer
  std::size_t gradient_steps = 0;  // minibatch steps across all updates
};

/// Preview (L_PRE), then review with random selection and no early stop
/// (L_REV; A-RSR adds the adversarial phase). f_ex / f_c are frozen after the
/// preview phase and checked bit-identical at the end.
StageOneResult train_stage1(const RunConfig& config, const PreparedData& data, RsrModel& model);

/// PPO on the policy with every other module frozen (checked at the end).
StageTwoResult train_stage2(const RunConfig& config, const PreparedData& data, RsrModel& model);

/// One A-RSR alternation over a batch of training instances: a generator step
/// on f_p / f_v, then a discriminator step. Returns (generator, discriminator) mean losses.
std::pair<double, double> adversarial_round(const RunConfig& config, const PreparedData& data, RsrModel& model,
                                            const preview::PreviewCache& cache,
                                            const std::vector<std::size_t>& batch, nn::Rng& rng);

enum class Stage { one, two, all };

/// Trains and writes `checkpoint` plus its config sidecar. Stage two reads
/// the existing checkpoint and overwrites it.
void train_to_checkpoint(const RunConfig& config, Stage stage, const std::filesystem::path& checkpoint);

}  // namespace rsr::pipeline
