// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rsr/errors.hpp"
#include "rsr/policy/policy.hpp"
#include "rsr/policy/ppo.hpp"
#include "support/oracles.hpp"

using namespace rsr;
using namespace rsr::policy;

namespace {

std::vector<float> random_vector(nn::Rng& rng, std::size_t n, float lo = -1.0f, float hi = 1.0f) {
  std::vector<float> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

PolicyConfig small_config(std::size_t k) {
  PolicyConfig c;
  c.h_dim = 5;
  c.m = 4;
  c.k = k;
  c.state_dim = 6;
  c.pred_hidden = 5;
  c.pred_dim = 4;
  c.head_hidden = 8;
  return c;
}

Transition transition(nn::Rng& rng, const PolicyConfig& c, std::vector<bool> used) {
  Transition t;
  t.h = random_vector(rng, c.h_dim);
  t.a0 = random_vector(rng, c.m);
  t.at = random_vector(rng, c.m);
  t.used = std::move(used);
  return t;
}

}  // namespace

TEST_CASE("advantages match a brute-force discounted sum on 100 random episodes") {
  nn::Rng rng(41);
  double worst = 0.0;
  for (int e = 0; e < 100; ++e) {
    const std::size_t len = 1 + rng.index(5);
    auto r = random_vector(rng, len, 0.0f, 2.5f);
    auto v = random_vector(rng, len, -1.0f, 3.0f);
    const float gamma = 0.99f;
    auto got = compute_advantages(r, v, gamma);
    auto ret = oracle::discounted_returns(r, static_cast<double>(gamma));
    for (std::size_t t = 0; t < len; ++t) {
      worst = std::max(worst, std::abs(got.returns[t] - ret[t]));
      worst = std::max(worst, std::abs(got.advantages[t] - (ret[t] - v[t])));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("advantages: hand cases and errors") {
  auto a = compute_advantages(std::vector<float>{1, 1}, std::vector<float>{0, 0}, 0.99f);
  CHECK(a.advantages[0] == doctest::Approx(1.99f));
  CHECK(a.advantages[1] == doctest::Approx(1.0f));

  std::vector<float> r{0.5f, 2.0f, 1.0f};
  auto ret = compute_advantages(r, std::vector<float>(3, 0.0f), 0.9f).returns;
  auto exact = compute_advantages(r, ret, 0.9f);
  for (float x : exact.advantages) CHECK(std::abs(x) < 1e-6f);

  auto single = compute_advantages(std::vector<float>{2.5f}, std::vector<float>{0.75f}, 0.99f);
  CHECK(single.advantages[0] == doctest::Approx(1.75f));

  CHECK_THROWS_AS(compute_advantages(std::vector<float>{}, std::vector<float>{}, 0.99f), ContractError);
  CHECK_THROWS_AS(compute_advantages(std::vector<float>{1}, std::vector<float>{1, 2}, 0.99f), DimensionError);
}

TEST_CASE("clipped surrogate branches") {
  CHECK(clipped_surrogate(1.5, 2.0) == doctest::Approx(1.2 * 2.0));
  CHECK(clipped_surrogate(1.5, -2.0) == doctest::Approx(1.5 * -2.0));
  CHECK(clipped_surrogate(0.5, 2.0) == doctest::Approx(0.5 * 2.0));
  CHECK(clipped_surrogate(0.5, -2.0) == doctest::Approx(0.8 * -2.0));
  CHECK(clipped_surrogate(1.0, 0.7) == doctest::Approx(0.7));
}

TEST_CASE("clipped surrogate is the pessimistic bound") {
  nn::Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double r = rng.uniform(0.0f, 3.0f);
    const double a = rng.uniform(-5.0f, 5.0f);
    const double v = clipped_surrogate(r, a);
    CHECK(v <= r * a + 1e-12);
    CHECK(v <= std::clamp(r, 0.8, 1.2) * a + 1e-12);
    CHECK((v == r * a || v == std::clamp(r, 0.8, 1.2) * a));
  }
}

TEST_CASE("select: masked mass is zero and the rest sums to one") {
  auto c = small_config(5);
  PolicyNet net(c);
  nn::Rng rng(43);
  net.init(rng);
  for (int i = 0; i < 200; ++i) {
    std::vector<bool> used(5);
    for (std::size_t j = 0; j < 5; ++j) used[j] = rng.bernoulli(0.4);
    used[rng.index(5)] = false;
    auto s = select(net, random_vector(rng, 5), random_vector(rng, 4), random_vector(rng, 4), {}, used, &rng, true);
    double total = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      if (used[j]) CHECK(s.probabilities[j] == 0.0f);
      total += s.probabilities[j];
    }
    CHECK(std::abs(total - 1.0) < 1e-6);
    CHECK_FALSE(used[s.action]);
    CHECK(s.log_prob == doctest::Approx(std::log(s.probabilities[s.action])).epsilon(1e-5));
  }
}

TEST_CASE("select: the only free action is chosen with probability one") {
  auto c = small_config(2);
  PolicyNet net(c);
  nn::Rng rng(44);
  net.init(rng);
  for (int i = 0; i < 50; ++i) {
    auto s = select(net, random_vector(rng, 5), random_vector(rng, 4), random_vector(rng, 4), {}, {true, false}, &rng,
                    true);
    CHECK(s.action == 1);
    CHECK(s.probabilities[1] == doctest::Approx(1.0f));
  }
  CHECK_THROWS_AS(select(net, random_vector(rng, 5), random_vector(rng, 4), random_vector(rng, 4), {}, {true, true},
                         &rng, true),
                  StateError);
}

TEST_CASE("select: uniform logits give 1/k") {
  auto c = small_config(4);
  PolicyNet net(c);
  nn::Rng rng(45);
  net.init(rng);
  for (auto* p : net.parameters()) {
    if (p->name.rfind("policy.actor2", 0) == 0) p->fill(0.0f);
  }
  auto s = select(net, random_vector(rng, 5), random_vector(rng, 4), random_vector(rng, 4), {},
                  std::vector<bool>(4, false), nullptr, false);
  for (float p : s.probabilities) CHECK(p == doctest::Approx(0.25f));
}

TEST_CASE("select: hidden state depends on the fed-back prediction") {
  auto c = small_config(3);
  PolicyNet net(c);
  nn::Rng rng(46);
  net.init(rng);
  auto h = random_vector(rng, 5);
  auto a0 = random_vector(rng, 4);
  auto first = select(net, h, a0, a0, {}, {false, false, false}, nullptr, false);
  std::vector<bool> used{false, false, false};
  used[first.action] = true;
  auto x = select(net, h, a0, random_vector(rng, 4), first.hidden, used, nullptr, false);
  auto y = select(net, h, a0, random_vector(rng, 4), first.hidden, used, nullptr, false);
  CHECK(x.hidden != y.hidden);
  CHECK(x.hidden != first.hidden);
}

TEST_CASE("term probabilities and the RSR reward") {
  review::ReviewStep step;
  step.loss_loc = 0.0f;
  step.loss_oa = static_cast<float>(std::log(2.0));
  step.loss_jnt = -3.0f;  // joint loss can go negative
  auto p = term_probabilities(step);
  CHECK(p.loc == doctest::Approx(1.0f));
  CHECK(p.oa == doctest::Approx(0.5f));
  CHECK(p.jnt == doctest::Approx(1.0f));

  CHECK(reward_rsr({1, 1, 1}, 1.5f) == doctest::Approx(2.5f));
  CHECK(reward_rsr({0, 0, 0}, 0.0f) == 0.0f);
  nn::Rng rng(47);
  for (int i = 0; i < 200; ++i) {
    TermProbabilities t{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
    const float u = rng.uniform(0, 2);
    const float base = reward_rsr(t, u);
    auto bump = t;
    bump.oa = std::min(1.0f, bump.oa + 0.1f);
    CHECK(reward_rsr(bump, u) >= base);
    CHECK(reward_rsr(t, u + 0.1f) > base);
  }

  review::ReviewTrajectory traj;
  for (float l : {0.0f, 1.0f}) {
    review::ReviewStep s;
    s.loss_loc = s.loss_oa = s.loss_jnt = l;
    s.p_uni_target = 0.5f;
    traj.steps.push_back(s);
  }
  auto per = rsr_rewards(traj);
  CHECK(per[0] == doctest::Approx(1.5f));
  CHECK(per[1] == doctest::Approx(std::exp(-1.0f) + 0.5f));
  auto mean = rsr_rewards(traj, RewardForm::episode_mean);
  CHECK(mean[0] == doctest::Approx((per[0] + per[1]) / 2));
  CHECK(mean[1] == mean[0]);
}

TEST_CASE("rollout buffer: contracts and normalization") {
  RolloutBuffer buffer;
  CHECK_THROWS_AS(buffer.add(EpisodeRecord{}), ContractError);

  auto c = small_config(3);
  PolicyNet net(c);
  nn::Rng rng(48);
  net.init(rng);
  PpoConfig ppo;
  nn::OptimizerConfig opt;
  CHECK_THROWS_AS(ppo_update(net, buffer, ppo, opt, rng), ContractError);

  for (int e = 0; e < 6; ++e) {
    EpisodeRecord rec;
    for (int t = 0; t < 1 + e % 3; ++t) {
      auto tr = transition(rng, c, {false, false, false});
      tr.reward = rng.uniform(0, 2);
      tr.value = rng.uniform(0, 1);
      rec.transitions.push_back(tr);
    }
    buffer.add(rec);
  }
  CHECK(buffer.transitions() == 12);
  CHECK_THROWS_AS(ppo_update(net, buffer, ppo, opt, rng), StateError);

  buffer.finalize(0.99f, true);
  double sum = 0.0, sq = 0.0;
  for (const auto& ep : buffer.episodes()) {
    for (float a : ep.advantages) {
      sum += a;
      sq += static_cast<double>(a) * a;
    }
  }
  CHECK(std::abs(sum / 12.0) < 1e-6);
  CHECK(sq / 12.0 == doctest::Approx(1.0).epsilon(1e-5));
  ppo_update(net, buffer, ppo, opt, rng);
  CHECK(buffer.empty());
  CHECK(buffer.transitions() == 0);
}

TEST_CASE("ppo: unchanged policy gives ratio one, so the surrogate is the advantage") {
  auto c = small_config(3);
  PolicyNet net(c);
  nn::Rng rng(49);
  net.init(rng);
  RolloutBuffer buffer;
  double adv_sum = 0.0;
  std::size_t n = 0;
  for (int e = 0; e < 4; ++e) {
    EpisodeRecord rec;
    std::vector<float> hidden;
    std::vector<bool> used(3, false);
    for (int t = 0; t < 2; ++t) {
      auto tr = transition(rng, c, used);
      auto s = select(net, tr.h, tr.a0, tr.at, hidden, used, &rng, true);
      hidden = s.hidden;
      tr.action = s.action;
      tr.log_prob = s.log_prob;
      tr.value = s.value;
      tr.reward = rng.uniform(0, 2);
      used[s.action] = true;
      rec.transitions.push_back(tr);
    }
    buffer.add(rec);
  }
  buffer.finalize(0.99f, false);
  for (const auto& ep : buffer.episodes()) {
    for (float a : ep.advantages) {
      adv_sum += a;
      ++n;
    }
  }
  PpoConfig ppo;
  ppo.epochs = 1;
  ppo.minibatch_transitions = 1000;
  auto stats = ppo_update(net, buffer, ppo, nn::OptimizerConfig{}, rng);
  CHECK(stats.updates == 1);
  CHECK(stats.mean_surrogate == doctest::Approx(adv_sum / static_cast<double>(n)).epsilon(1e-5));
}

TEST_CASE("ppo: a NaN ratio aborts the update") {
  auto c = small_config(2);
  PolicyNet net(c);
  nn::Rng rng(50);
  net.init(rng);
  RolloutBuffer buffer;
  EpisodeRecord rec;
  auto tr = transition(rng, c, {false, false});
  tr.log_prob = std::numeric_limits<float>::quiet_NaN();
  tr.reward = 1.0f;
  rec.transitions.push_back(tr);
  buffer.add(rec);
  buffer.finalize(0.99f);
  CHECK_THROWS_AS(ppo_update(net, buffer, PpoConfig{}, nn::OptimizerConfig{}, rng), NumericError);
}

TEST_CASE("ppo: one-state bandit converges to the rewarded action") {
  auto c = small_config(2);
  PolicyNet net(c);
  nn::Rng rng(51);
  net.init(rng);
  const std::vector<float> h(5, 0.3f), a0(4, -0.2f);
  const std::vector<bool> none{false, false};
  nn::OptimizerConfig opt;
  opt.learning_rate = 1e-2f;
  PpoConfig ppo;
  ppo.minibatch_transitions = 16;

  auto p_best = [&] { return select(net, h, a0, a0, {}, none, nullptr, false).probabilities[0]; };
  const float start = p_best();
  std::size_t updates = 0;
  while (p_best() <= 0.9f && updates < 2000) {
    RolloutBuffer buffer;
    while (buffer.transitions() < 64) {
      auto s = select(net, h, a0, a0, {}, none, &rng, true);
      Transition tr{h, a0, a0, none, s.action, s.log_prob, s.value, s.action == 0 ? 1.0f : 0.0f};
      buffer.add(EpisodeRecord{{tr}, {}, {}});
    }
    buffer.finalize(0.99f, true);
    ppo_update(net, buffer, ppo, opt, rng);
    ++updates;
  }
  MESSAGE("bandit: p(best) " << start << " -> " << p_best() << " after " << updates << " updates");
  CHECK(p_best() > 0.9f);
  CHECK(updates <= 2000);
}
