// SPDX-License-Identifier: Apache-2.0
#include "rsr/review/episode.hpp"

#include <algorithm>
#include <cmath>

#include "rsr/errors.hpp"

namespace rsr::review {

std::size_t RandomSelector::select(const SelectionState& state) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < state.used->size(); ++i) {
    if (!(*state.used)[i]) free.push_back(i);
  }
  if (free.empty()) throw StateError("no unused attribute group left");
  return free[rng_.index(free.size())];
}

std::size_t ScriptedSelector::select(const SelectionState& state) {
  if (state.step >= order_.size()) throw StateError("scripted selector ran out of actions");
  return order_[state.step];
}

Episode run_episode(nn::Tape& tape, const preview::PreviewOutputs& pre, const ReviewModels& models,
                    Selector& selector, const EpisodeOptions& options) {
  const auto& rc = options.review;
  const std::size_t m = pre.a0.size();
  const std::size_t k = models.grouping->k();
  if (k != rc.k) throw ContractError("grouping k differs from review k");
  if (options.confidence_bank == nullptr) throw ContractError("episode needs a confidence class bank");
  if (options.target && options.loss_bank == nullptr) throw ContractError("episode losses need a class bank");

  Episode ep;
  auto& traj = ep.trajectory;
  traj.a0 = pre.a0;
  traj.max_steps = k;

  auto h = tape.constant(std::span<const float>(pre.h));
  auto a0 = tape.constant(std::span<const float>(pre.a0));
  auto g = (*models.grouping)(h, a0);
  traj.groups = g.value();

  std::optional<nn::Var> bank, phi_y;
  if (options.target) {
    bank = options.loss_bank->matrix(tape);
    phi_y = tape.constant(options.loss_bank->row(*options.target));
  }

  const auto p0 = data::class_probabilities(pre.a0, *options.confidence_bank, rc.probability);
  std::vector<std::vector<float>> p_rev;
  std::optional<std::vector<float>> p0_loss;
  std::vector<std::vector<float>> p_rev_loss;
  if (options.target) p0_loss = data::class_probabilities(pre.a0, *options.loss_bank, rc.probability);

  std::vector<bool> used(k, false);
  std::vector<StepLosses<float>> losses;
  nn::Var at = a0;
  for (std::size_t t = 0; t < k; ++t) {
    const auto at_value = at.value();
    SelectionState state{t, pre.h, pre.a0, at_value, &used, traj.groups};
    const std::size_t l = selector.select(state);
    if (l >= k || used[l]) throw ContractError("selector returned a used or out-of-range group");
    used[l] = true;

    auto g_row = nn::slice(g, l * m, m);
    auto ar = (*models.revision)(a0, h, g_row, options.dropout_rng, options.training);
    auto next = revise(at, ar, t);

    ReviewStep step;
    step.group = l;
    step.revision = ar.value();
    step.revised = next.value();
    p_rev.push_back(data::class_probabilities(step.revision, *options.confidence_bank, rc.probability));
    step.eta = confidence(p0, p_rev);

    if (options.target) {
      StepLosses<float> sl{loss_loc(ar, *options.target, *bank), loss_oa(next, *options.target, *bank),
                           loss_jnt(a0, next, *phi_y, *bank, rc.jnt_form)};
      step.loss_loc = sl.loc.item();
      step.loss_oa = sl.oa.item();
      step.loss_jnt = sl.jnt.item();
      losses.push_back(sl);
      p_rev_loss.push_back(data::class_probabilities(step.revision, *options.loss_bank, rc.probability));
      step.p_uni_target = union_probability(*p0_loss, p_rev_loss)[*options.target];
    }

    const bool confident = options.early_stop && step.eta > rc.eta_threshold;
    const bool last = confident || t + 1 == k;
    step.halted = last;
    traj.steps.push_back(std::move(step));
    ep.revised.push_back(next);
    at = next;
    if (last) {
      traj.reason = confident ? HaltReason::confident : HaltReason::exhausted;
      break;
    }
  }
  if (options.target) ep.loss = loss_rev(losses, rc.alpha);
  selector.finish(traj);
  return ep;
}

ReviewTrajectory review_episode(const preview::PreviewOutputs& pre, const ReviewModels& models, Selector& selector,
                                const EpisodeOptions& options) {
  nn::Tape tape(false);
  return run_episode(tape, pre, models, selector, options).trajectory;
}

}  // namespace rsr::review
