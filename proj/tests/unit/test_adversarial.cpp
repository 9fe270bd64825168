// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "rsr/adversarial/adversarial.hpp"
#include "rsr/errors.hpp"
#include "rsr/nn/optimizer.hpp"
#include "rsr/pipeline/model.hpp"
#include "rsr/pipeline/train.hpp"

using namespace rsr;
using namespace rsr::adversarial;

namespace {

std::vector<float> random_vector(nn::Rng& rng, std::size_t n, float lo = -1.0f, float hi = 1.0f) {
  std::vector<float> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

pipeline::RunConfig tiny_run() {
  pipeline::RunConfig c;
  c.synth.n_seen_classes = 6;
  c.synth.n_unseen_classes = 2;
  c.synth.instances_per_class = 6;
  c.synth.m = 8;
  c.synth.feature_dim = 16;
  c.k = 4;
  c.mode = pipeline::Mode::arsr;
  c.discriminator_hidden = 16;
  c.grouping_hidden = 16;
  c.grouping_embed_dim = 8;
  c.revision_embed_dim = 8;
  c.preview_epochs = 1;
  c.review_epochs = 1;
  c.ppo_updates = 1;
  return c;
}

}  // namespace

TEST_CASE("zero-weight discriminator scores 0.5; scores stay inside [0, 1]") {
  Discriminator d(6, 10);
  nn::Rng rng(61);
  d.init(rng);
  for (int i = 0; i < 200; ++i) {
    const float s = d.score(random_vector(rng, 6, -50, 50));
    CHECK(s >= 0.0f);
    CHECK(s <= 1.0f);
  }
  for (auto* p : d.parameters()) p->fill(0.0f);
  CHECK(d.score(random_vector(rng, 6)) == doctest::Approx(0.5f));
  CHECK_THROWS_AS(d.score(random_vector(rng, 5)), DimensionError);
}

TEST_CASE("adversarial value: equilibrium, geometric weighting and a hand step") {
  CHECK(adversarial_value(std::vector<float>{0.5f}, std::vector<float>{0.5f}, 0.9f) ==
        doctest::Approx(2.0 * std::log(0.5)));
  const double v = std::log(0.7) + std::log(0.6);
  CHECK(adversarial_value(std::vector<float>{0.7f, 0.7f}, std::vector<float>{0.4f, 0.4f}, 0.9f) ==
        doctest::Approx(v * 1.9).epsilon(1e-6));
  CHECK(adversarial_value(std::vector<float>{0.8f}, std::vector<float>{0.3f}, 0.9f) ==
        doctest::Approx(std::log(0.8) + std::log(0.7)).epsilon(1e-6));
  CHECK_THROWS_AS(adversarial_value(std::vector<float>{0.5f}, std::vector<float>{}, 0.9f), DimensionError);

  nn::Tape tape(false);
  auto c = [&](float x) { return tape.constant(std::vector<float>{x}); };
  auto tv = adversarial_objective<float>({c(0.8f), c(0.6f)}, {c(0.3f), c(0.1f)}, 0.5f);
  CHECK(tv.item() == doctest::Approx(std::log(0.8) + std::log(0.7) + 0.5 * (std::log(0.6) + std::log(0.9)))
                         .epsilon(1e-6));
}

TEST_CASE("safe_log clamps at 1e-7 and the objective stays finite") {
  nn::Tape tape(false);
  CHECK(safe_log(tape.constant(std::vector<float>{0.0f})).item() == doctest::Approx(std::log(1e-7)).epsilon(1e-5));
  CHECK(safe_log(tape.constant(std::vector<float>{2.0f})).item() == 0.0f);
  CHECK(std::isfinite(adversarial_value(std::vector<float>{0.0f}, std::vector<float>{1.0f}, 0.9f)));
  auto v = adversarial_objective<float>({tape.constant(std::vector<float>{0.0f})},
                                        {tape.constant(std::vector<float>{1.0f})}, 0.9f);
  CHECK(std::isfinite(v.item()));
}

TEST_CASE("adversarial rewards") {
  CHECK(rewards_adversarial(1.0f, 0.0f).dis == 1.0f);
  CHECK(rewards_adversarial(2.5f, 1.0f).arsr == doctest::Approx(3.5f));
  nn::Rng rng(62);
  for (int i = 0; i < 1000; ++i) {
    const float d = rng.uniform(0, 1);
    auto r = rewards_adversarial(rng.uniform(0, 3), d);
    CHECK(r.dis + d == doctest::Approx(1.0f).epsilon(1e-6));
  }
}

TEST_CASE("discriminator separates real from fake clusters after training") {
  const std::size_t m = 4;
  Discriminator d(m, 16);
  nn::Rng rng(63);
  d.init(rng);
  auto params = d.parameters();
  nn::OptimizerConfig opt;
  opt.learning_rate = 0.05f;
  auto real_sample = [&] { return random_vector(rng, m, 0.5f, 1.0f); };
  auto fake_sample = [&] { return random_vector(rng, m, -1.0f, -0.5f); };
  for (int step = 0; step < 200; ++step) {
    nn::zero_grad(params);
    for (int b = 0; b < 8; ++b) {
      nn::Tape tape;
      tape.backward(discriminator_loss(tape, d, {fake_sample(), fake_sample()}, {real_sample(), real_sample()}, 0.9f));
    }
    nn::sgd_step(params, opt);
  }
  double real = 0.0, fake = 0.0;
  for (int i = 0; i < 100; ++i) {
    real += d.score(real_sample());
    fake += d.score(fake_sample());
  }
  CHECK(real / 100.0 > fake / 100.0 + 0.5);
}

TEST_CASE("generator loss leaves a frozen discriminator without gradient") {
  Discriminator d(4, 8);
  nn::Rng rng(64);
  d.init(rng);
  auto params = d.parameters();
  nn::set_trainable(params, false);
  nn::Tape tape;
  auto leaf = tape.leaf(random_vector(rng, 4));
  auto classifier = tape.leaf(std::vector<float>{0.3f});
  auto loss = generator_loss(d, {leaf}, {random_vector(rng, 4)}, classifier, 0.9f);
  tape.backward(loss);
  for (auto* p : params) CHECK_FALSE(p->tensor.has_grad());
  CHECK(tape.grad(leaf) != std::vector<float>(4, 0.0f));
  nn::set_trainable(params, true);
}

TEST_CASE("adversarial round: freeze contracts hold across the alternation") {
  auto config = tiny_run();
  auto data = pipeline::prepare_data(config);
  pipeline::RsrModel model(config, data);
  nn::Rng rng(config.seed);
  model.init(rng);
  auto preview = model.preview.parameters();
  auto policy = model.policy.parameters();
  auto review = model.review_parameters();
  auto dis = model.discriminator.parameters();
  nn::set_trainable(preview, false);
  const auto preview_before = nn::snapshot(preview);
  const auto policy_before = nn::snapshot(policy);
  const auto review_before = nn::snapshot(review);
  const auto dis_before = nn::snapshot(dis);

  const preview::PreviewCache cache(model.preview, data.dataset);
  std::vector<std::size_t> batch(data.train.begin(), data.train.begin() + 8);
  for (int round = 0; round < 3; ++round) {
    auto [g, dl] = pipeline::adversarial_round(config, data, model, cache, batch, rng);
    CHECK(std::isfinite(g));
    CHECK(std::isfinite(dl));
  }
  CHECK(nn::same_values(preview, preview_before));
  CHECK(nn::same_values(policy, policy_before));
  CHECK_FALSE(nn::same_values(review, review_before));
  CHECK_FALSE(nn::same_values(dis, dis_before));
  for (auto* p : review) CHECK(p->trainable);
  for (auto* p : dis) CHECK(p->trainable);
}

TEST_CASE("A-RSR stage one runs with warm and cold starts and keeps the preview frozen") {
  for (auto init : {pipeline::ArsrInit::warm, pipeline::ArsrInit::cold}) {
    auto config = tiny_run();
    config.arsr_init = init;
    auto data = pipeline::prepare_data(config);
    pipeline::RsrModel model(config, data);
    nn::Rng rng(config.seed);
    model.init(rng);
    auto result = pipeline::train_stage1(config, data, model);
    CHECK(result.preview_loss.size() == 1);
    CHECK(result.review_loss.size() == (init == pipeline::ArsrInit::warm ? 1u : 0u));
    CHECK(result.adversarial_loss.size() >= 1);
    CHECK(result.discriminator_loss.size() == result.adversarial_loss.size());
  }
}
