// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rsr/grouping/grouping.hpp"
#include "rsr/preview/preview.hpp"
#include "rsr/review/review.hpp"

namespace rsr::review {

enum class HaltReason { running, confident, exhausted };

struct ReviewStep {
  std::size_t group = 0;
  std::vector<float> revision;  // a_r^t
  std::vector<float> revised;   // a^t
  float eta = 0.0f;
  bool halted = false;
  // Filled when the episode knows the target class.
  float loss_loc = 0.0f;
  float loss_oa = 0.0f;
  float loss_jnt = 0.0f;
  float p_uni_target = 0.0f;
};

struct ReviewTrajectory {
  std::vector<float> a0;
  std::vector<float> groups;  // k x m
  std::vector<ReviewStep> steps;
  std::size_t max_steps = 0;
  HaltReason reason = HaltReason::running;

  /// a^t of the last step, or a0 when no step ran.
  const std::vector<float>& final_prediction() const { return steps.empty() ? a0 : steps.back().revised; }
  /// Prediction frozen at step s (0 = preview); halted episodes keep their last one.
  const std::vector<float>& prediction_at(std::size_t s) const {
    if (s == 0 || steps.empty()) return a0;
    return steps[std::min(s, steps.size()) - 1].revised;
  }
};

/// What a selector sees before choosing step t+1.
struct SelectionState {
  std::size_t step = 0;  // steps already taken
  std::span<const float> h;
  std::span<const float> a0;
  std::span<const float> at;
  const std::vector<bool>* used = nullptr;
  std::span<const float> groups;  // k x m
};

/// Picks the next attribute group. Must never return a used index.
class Selector {
 public:
  virtual ~Selector() = default;
  virtual std::size_t select(const SelectionState& state) = 0;
  /// Called when an episode ends.
  virtual void finish(const ReviewTrajectory&) {}
};

/// Uniform over unused groups.
class RandomSelector final : public Selector {
 public:
  explicit RandomSelector(nn::Rng& rng) : rng_(rng) {}
  std::size_t select(const SelectionState& state) override;

 private:
  nn::Rng& rng_;
};

/// Replays a fixed order; throws StateError when it runs out.
class ScriptedSelector final : public Selector {
 public:
  explicit ScriptedSelector(std::vector<std::size_t> order) : order_(std::move(order)) {}
  std::size_t select(const SelectionState& state) override;

 private:
  std::vector<std::size_t> order_;
};

struct EpisodeOptions {
  ReviewConfig review;
  bool training = false;
  nn::Rng* dropout_rng = nullptr;
  /// Classes for eta (softmax over this set).
  const data::ClassBank* confidence_bank = nullptr;
  /// Seen classes for the losses, and the target's position among them.
  const data::ClassBank* loss_bank = nullptr;
  std::optional<std::size_t> target;
  /// Halting on eta; off in Stage-I.
  bool early_stop = true;
};

struct Episode {
  ReviewTrajectory trajectory;
  /// L_REV when a target was given.
  std::optional<nn::Var> loss;
  std::vector<nn::Var> revised;  // a^t on the tape, for the discriminator
};

struct ReviewModels {
  const grouping::GroupingNet* grouping = nullptr;
  const RevisionModule* revision = nullptr;
};

/// Runs rethink -> revisit -> revise up to k times on `tape`.
Episode run_episode(nn::Tape& tape, const preview::PreviewOutputs& pre, const ReviewModels& models,
                    Selector& selector, const EpisodeOptions& options);

/// Grad-free convenience wrapper.
ReviewTrajectory review_episode(const preview::PreviewOutputs& pre, const ReviewModels& models, Selector& selector,
                                const EpisodeOptions& options);

}  // namespace rsr::review
