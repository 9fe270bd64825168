// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rsr/data/class_bank.hpp"
#include "rsr/data/synth.hpp"
#include "rsr/nn/optimizer.hpp"
#include "rsr/policy/policy.hpp"
#include "rsr/policy/ppo.hpp"
#include "rsr/review/review.hpp"

namespace rsr::pipeline {

enum class Mode { rsr, arsr };
enum class Selection { reinforced, random };
enum class GroupingMode { learned, oracle };
enum class CalibrationSign { penalize_unseen, favor_unseen };
enum class RealAttribute { instance, uniform_seen };
enum class ArsrInit { warm, cold };

/// Every knob of a run. Serialized as one flat JSON object; unknown keys are
/// rejected and validation errors name the key.
struct RunConfig {
  // data
  std::string data_dir;  // empty: generate the synthetic benchmark
  data::SynthConfig synth;
  std::uint64_t seed = 272;
  float seen_test_fraction = 0.2f;

  // review / policy
  std::size_t k = 5;
  float eta_threshold = 0.4f;
  float alpha = 0.9f;
  float gamma = 0.99f;
  bool early_stop = true;
  Mode mode = Mode::rsr;
  Selection selection = Selection::reinforced;
  GroupingMode grouping = GroupingMode::learned;
  data::ProbabilityForm probability = data::ProbabilityForm::cosine;
  review::JntForm jnt_form = review::JntForm::product;
  policy::RewardForm reward_form = policy::RewardForm::per_step;
  RealAttribute real_attribute = RealAttribute::instance;
  ArsrInit arsr_init = ArsrInit::warm;

  // shapes
  std::size_t extractor_dim = 0;
  std::size_t classifier_hidden = 0;
  bool classifier_bias = true;
  float keep_rate = 0.5f;
  std::size_t grouping_embed_dim = 32;
  std::size_t grouping_hidden = 64;
  std::size_t revision_embed_dim = 32;
  bool revision_bias = true;
  std::size_t policy_state_dim = 32;
  std::size_t policy_pred_hidden = 32;
  std::size_t policy_pred_dim = 32;
  std::size_t policy_head_hidden = 64;
  std::size_t discriminator_hidden = 256;

  // optimization
  nn::OptimizerConfig optimizer;
  float policy_learning_rate = 1e-3f;
  std::size_t batch_size = 64;
  std::size_t preview_epochs = 40;
  std::size_t review_epochs = 80;
  std::size_t ppo_updates = 300;
  policy::PpoConfig ppo;

  // inference
  double calibration_epsilon = 0.0;
  CalibrationSign calibration_sign = CalibrationSign::penalize_unseen;

  void validate() const;
  review::ReviewConfig review_config() const;
  nn::OptimizerConfig policy_optimizer() const;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Sidecar path holding the config a checkpoint was trained with.
std::filesystem::path config_sidecar(const std::filesystem::path& checkpoint);

}  // namespace rsr::pipeline
