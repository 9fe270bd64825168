// SPDX-License-Identifier: Apache-2.0
#include "rsr/pipeline/train.hpp"

#include <algorithm>
#include <cmath>

#include "rsr/errors.hpp"
#include "rsr/nn/checkpoint.hpp"
#include "rsr/pipeline/log.hpp"
#include "rsr/policy/ppo.hpp"
#include "rsr/review/episode.hpp"

namespace rsr::pipeline {

namespace {

// Fixed stream identities: each phase forks from the run seed independently.
enum Stream : std::uint64_t { kInit = 1, kPreview = 2, kReview = 3, kAdversarial = 4, kPolicy = 5 };

nn::Rng stream(const RunConfig& config, Stream s) {
  return nn::Rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(s));
}

std::vector<std::vector<std::size_t>> batches(std::vector<std::size_t> items, std::size_t size, nn::Rng& rng) {
  rng.shuffle(items);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < items.size(); i += size) {
    out.emplace_back(items.begin() + static_cast<long>(i),
                     items.begin() + static_cast<long>(std::min(items.size(), i + size)));
  }
  return out;
}

void step_all(const nn::ParameterList& params, const nn::OptimizerConfig& opt) {
  // Parameters the batch never reached still take a (decay-only) step.
  for (nn::Parameter* p : params) {
    if (p->trainable) p->tensor.ensure_grad();
  }
  nn::ParameterList live;
  for (nn::Parameter* p : params) {
    if (p->trainable) live.push_back(p);
  }
  nn::sgd_step(live, opt);
}

void check_finite_loss(float v, const char* phase) {
  if (!std::isfinite(v)) throw NumericError(std::string(phase) + ": loss diverged to " + std::to_string(v));
}

std::size_t seen_target(const PreparedData& data, std::size_t instance) {
  auto pos = data.dataset.seen_position(data.dataset.label(instance));
  if (!pos) throw ContractError("training instance of an unseen class");
  return *pos;
}

review::EpisodeOptions training_options(const RunConfig& config, const PreparedData& data, nn::Rng* rng,
                                        std::size_t target) {
  review::EpisodeOptions o;
  o.review = config.review_config();
  o.training = true;
  o.dropout_rng = rng;
  o.confidence_bank = &data.seen_bank;
  o.loss_bank = &data.seen_bank;
  o.target = target;
  o.early_stop = false;
  return o;
}

std::vector<std::vector<float>> real_attributes(const RunConfig& config, const PreparedData& data,
                                                std::size_t target, std::size_t steps, nn::Rng& rng) {
  std::vector<std::vector<float>> out;
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t pos = config.real_attribute == RealAttribute::instance ? target : rng.index(data.seen_bank.size());
    auto r = data.seen_bank.row(pos);
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

void train_preview(const RunConfig& config, const PreparedData& data, RsrModel& model, StageOneResult& result) {
  nn::Rng rng = stream(config, kPreview);
  auto params = model.preview.parameters();
  for (std::size_t epoch = 0; epoch < config.preview_epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : batches(data.train, config.batch_size, rng)) {
      nn::zero_grad(params);
      const float inv = 1.0f / static_cast<float>(batch.size());
      for (std::size_t i : batch) {
        nn::Tape tape;
        auto h = model.preview.extract(tape, data.dataset.instance(i));
        auto a0 = model.preview.predict(h, &rng, true);
        auto loss = preview::loss_pre(a0, seen_target(data, i), data.seen_bank.matrix(tape));
        check_finite_loss(loss.item(), "preview");
        total += loss.item();
        tape.backward(nn::scale(loss, inv));
      }
      step_all(params, config.optimizer);
    }
    result.preview_loss.push_back(total / static_cast<double>(data.train.size()));
    log(LogLevel::info, "stage1.preview",
        {{"epoch", epoch + 1}, {"loss", result.preview_loss.back()}});
  }
}

void train_review(const RunConfig& config, const PreparedData& data, RsrModel& model,
                  const preview::PreviewCache& cache, StageOneResult& result) {
  nn::Rng rng = stream(config, kReview);
  auto params = model.review_parameters();
  for (std::size_t epoch = 0; epoch < config.review_epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : batches(data.train, config.batch_size, rng)) {
      nn::zero_grad(params);
      const float inv = 1.0f / static_cast<float>(batch.size());
      for (std::size_t i : batch) {
        nn::Tape tape;
        review::RandomSelector selector(rng);
        auto ep = review::run_episode(tape, cache[i], model.review_models(), selector,
                                      training_options(config, data, &rng, seen_target(data, i)));
        check_finite_loss(ep.loss->item(), "review");
        total += ep.loss->item();
        tape.backward(nn::scale(*ep.loss, inv));
      }
      step_all(params, config.optimizer);
    }
    result.review_loss.push_back(total / static_cast<double>(data.train.size()));
    log(LogLevel::info, "stage1.review", {{"epoch", epoch + 1}, {"loss", result.review_loss.back()}});
  }
}

}  // namespace

std::pair<double, double> adversarial_round(const RunConfig& config, const PreparedData& data, RsrModel& model,
                                            const preview::PreviewCache& cache,
                                            const std::vector<std::size_t>& batch, nn::Rng& rng) {
  auto gen_params = model.review_parameters();
  auto dis_params = model.discriminator.parameters();
  const float inv = 1.0f / static_cast<float>(batch.size());

  // Generator phase: f_dis frozen.
  nn::set_trainable(dis_params, false);
  nn::zero_grad(gen_params);
  std::vector<std::vector<std::vector<float>>> fakes, reals;
  double gen_total = 0.0;
  for (std::size_t i : batch) {
    const std::size_t target = seen_target(data, i);
    nn::Tape tape;
    review::RandomSelector selector(rng);
    auto ep = review::run_episode(tape, cache[i], model.review_models(), selector,
                                  training_options(config, data, &rng, target));
    auto real = real_attributes(config, data, target, ep.revised.size(), rng);
    auto loss = adversarial::generator_loss(model.discriminator, ep.revised, real, *ep.loss, config.alpha);
    check_finite_loss(loss.item(), "adversarial.generator");
    gen_total += loss.item();
    tape.backward(nn::scale(loss, inv));
    std::vector<std::vector<float>> f;
    for (const auto& v : ep.revised) f.push_back(v.value());
    fakes.push_back(std::move(f));
    reals.push_back(std::move(real));
  }
  step_all(gen_params, config.optimizer);
  nn::set_trainable(dis_params, true);

  // Discriminator phase on the detached a^t: spiral modules frozen.
  nn::set_trainable(gen_params, false);
  nn::zero_grad(dis_params);
  double dis_total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    nn::Tape tape;
    auto loss = adversarial::discriminator_loss(tape, model.discriminator, fakes[b], reals[b], config.alpha);
    check_finite_loss(loss.item(), "adversarial.discriminator");
    dis_total += loss.item();
    tape.backward(nn::scale(loss, inv));
  }
  step_all(dis_params, config.optimizer);
  nn::set_trainable(gen_params, true);
  return {gen_total * inv, dis_total * inv};
}

StageOneResult train_stage1(const RunConfig& config, const PreparedData& data, RsrModel& model) {
  config.validate();
  StageOneResult result;
  auto preview_params = model.preview.parameters();
  nn::set_trainable(preview_params, true);
  train_preview(config, data, model, result);

  nn::set_trainable(preview_params, false);
  const auto frozen = nn::snapshot(preview_params);
  const preview::PreviewCache cache(model.preview, data.dataset);

  const bool warm = config.mode == Mode::rsr || config.arsr_init == ArsrInit::warm;
  if (warm) train_review(config, data, model, cache, result);
  if (config.mode == Mode::arsr) {
    nn::Rng rng = stream(config, kAdversarial);
    for (std::size_t epoch = 0; epoch < config.review_epochs; ++epoch) {
      double g = 0.0, d = 0.0;
      std::size_t n = 0;
      for (const auto& batch : batches(data.train, config.batch_size, rng)) {
        auto [gl, dl] = adversarial_round(config, data, model, cache, batch, rng);
        g += gl * static_cast<double>(batch.size());
        d += dl * static_cast<double>(batch.size());
        n += batch.size();
      }
      result.adversarial_loss.push_back(g / static_cast<double>(n));
      result.discriminator_loss.push_back(d / static_cast<double>(n));
      log(LogLevel::info, "stage1.adversarial",
          {{"epoch", epoch + 1}, {"generator_loss", result.adversarial_loss.back()},
           {"discriminator_loss", result.discriminator_loss.back()}});
    }
  }
  if (!nn::same_values(preview_params, frozen)) throw StateError("preview parameters changed after freezing");
  nn::set_trainable(preview_params, true);
  return result;
}

StageTwoResult train_stage2(const RunConfig& config, const PreparedData& data, RsrModel& model) {
  config.validate();
  StageTwoResult result;
  if (config.selection == Selection::random) {
    log(LogLevel::info, "stage2", {{"skipped", "random selection"}});
    return result;
  }
  auto all = model.parameters();
  auto policy_params = model.policy.parameters();
  nn::set_trainable(all, false);
  nn::set_trainable(policy_params, true);
  nn::ParameterList frozen_params;
  for (nn::Parameter* p : all) {
    if (!p->trainable) frozen_params.push_back(p);
  }
  const auto frozen = nn::snapshot(frozen_params);

  const preview::PreviewCache cache(model.preview, data.dataset);
  nn::Rng rng = stream(config, kPolicy);
  auto ppo = config.ppo;
  ppo.gamma = config.gamma;

  std::size_t round = 0;
  while (result.updates < config.ppo_updates) {
    policy::RolloutBuffer buffer;
    double reward_sum = 0.0, length_sum = 0.0;
    std::size_t episodes = 0;
    // A-RSR alternates R_DIS (even rounds) and R_A-RSR (odd rounds).
    const bool dis_round = config.mode == Mode::arsr && round % 2 == 0;
    while (buffer.transitions() < ppo.buffer_transitions) {
      const std::size_t i = data.train[rng.index(data.train.size())];
      policy::EpisodeRecord record;
      policy::PolicySelector selector(model.policy, &rng, true, &record);
      review::EpisodeOptions o;
      o.review = config.review_config();
      o.confidence_bank = &data.seen_bank;
      o.loss_bank = &data.seen_bank;
      o.target = seen_target(data, i);
      o.early_stop = config.early_stop;
      const auto traj = review::review_episode(cache[i], model.review_models(), selector, o);
      auto rewards = policy::rsr_rewards(traj, config.reward_form);
      if (config.mode == Mode::arsr) {
        for (std::size_t t = 0; t < rewards.size(); ++t) {
          const float d = model.discriminator.score(traj.steps[t].revised);
          const auto r = adversarial::rewards_adversarial(rewards[t], d);
          rewards[t] = dis_round ? r.dis : r.arsr;
        }
      }
      for (std::size_t t = 0; t < rewards.size(); ++t) {
        record.transitions[t].reward = rewards[t];
        reward_sum += rewards[t];
      }
      length_sum += static_cast<double>(traj.steps.size());
      ++episodes;
      buffer.add(std::move(record));
    }
    result.round_reward.push_back(reward_sum / static_cast<double>(buffer.transitions()));
    result.round_length.push_back(length_sum / static_cast<double>(episodes));
    buffer.finalize(ppo.gamma, ppo.normalize_advantages);
    auto stats = policy::ppo_update(model.policy, buffer, ppo, config.policy_optimizer(), rng);
    ++result.updates;
    result.gradient_steps += stats.updates;
    log(LogLevel::info, "stage2.ppo",
        {{"round", round + 1}, {"steps", result.gradient_steps}, {"reward", result.round_reward.back()},
         {"length", result.round_length.back()}, {"entropy", stats.mean_entropy},
         {"value_loss", stats.mean_value_loss}});
    ++round;
  }
  if (!nn::same_values(frozen_params, frozen)) throw StateError("non-policy parameters changed in stage two");
  nn::set_trainable(all, true);
  return result;
}

void train_to_checkpoint(const RunConfig& config, Stage stage, const std::filesystem::path& checkpoint) {
  config.validate();
  const auto data = prepare_data(config);
  RsrModel model(config, data);
  if (stage == Stage::two) {
    model.load(checkpoint);
  } else {
    nn::Rng rng = stream(config, kInit);
    model.init(rng);
    train_stage1(config, data, model);
    model.save(checkpoint);
    config.save(config_sidecar(checkpoint));
  }
  if (stage != Stage::one) {
    train_stage2(config, data, model);
    model.save(checkpoint);
    config.save(config_sidecar(checkpoint));
  }
}

}  // namespace rsr::pipeline
