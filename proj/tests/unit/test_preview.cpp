// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rsr/data/class_bank.hpp"
#include "rsr/data/synth.hpp"
#include "rsr/errors.hpp"
#include "rsr/nn/optimizer.hpp"
#include "rsr/preview/preview.hpp"

using namespace rsr;
using namespace rsr::preview;

namespace {

data::AttributeMatrix attributes(std::vector<data::ClassId> ids, std::size_t m, std::vector<float> values) {
  data::AttributeMatrix a;
  a.class_ids = std::move(ids);
  a.m = m;
  a.values = std::move(values);
  return a;
}

double loss_of(std::vector<float> a0, std::size_t target, const data::ClassBank& bank) {
  nn::Tape tape(false);
  auto a = tape.constant(std::span<const float>(a0));
  return loss_pre(a, target, bank.matrix(tape)).item();
}

PreviewConfig config(std::size_t d, std::size_t m, std::size_t extractor = 0, std::size_t hidden = 0) {
  PreviewConfig c;
  c.feature_dim = d;
  c.m = m;
  c.extractor_dim = extractor;
  c.classifier_hidden = hidden;
  return c;
}

std::vector<float> predict_eval(const PreviewModel& model, const std::vector<float>& x) {
  nn::Tape tape(false);
  auto h = model.extract(tape, x);
  auto a = model.predict(h, nullptr, false);
  return a.value();
}

}  // namespace

TEST_CASE("pass-through extractor returns the input unchanged") {
  PreviewModel model(config(5, 3));
  nn::Rng rng(1);
  model.init(rng);
  std::vector<float> x{0.5f, -1.0f, 3.25f, 0.0f, 1e-6f};
  nn::Tape tape(false);
  auto h = model.extract(tape, x);
  CHECK(h.value() == x);
  CHECK(model.extractor_parameters().empty());
}

TEST_CASE("extract twice on one instance yields identical output") {
  PreviewModel model(config(4, 3, 6));
  nn::Rng rng(2);
  model.init(rng);
  std::vector<float> x{0.1f, 0.2f, -0.3f, 0.4f};
  nn::Tape t1(false), t2(false);
  CHECK(model.extract(t1, x).value() == model.extract(t2, x).value());
}

TEST_CASE("feature length mismatch is a DimensionError") {
  PreviewModel model(config(4, 3));
  nn::Rng rng(3);
  model.init(rng);
  nn::Tape tape(false);
  std::vector<float> x{1.0f, 2.0f};
  CHECK_THROWS_AS(model.extract(tape, x), DimensionError);
}

TEST_CASE("trainable extractor output changes after one sgd step") {
  PreviewModel model(config(4, 3, 5));
  nn::Rng rng(4);
  model.init(rng);
  std::vector<float> x{0.7f, -0.2f, 0.9f, 0.3f};
  auto bank = data::ClassBank::from(attributes({1, 2}, 3, {1, 0, 0, 0, 1, 1}), {0, 1});

  nn::Tape before_tape(false);
  const auto before = model.extract(before_tape, x).value();

  nn::Tape tape;
  auto a0 = model.predict(model.extract(tape, x), nullptr, false);
  tape.backward(loss_pre(a0, 1, bank.matrix(tape)));
  auto params = model.extractor_parameters();
  REQUIRE_FALSE(params.empty());
  nn::OptimizerConfig opt;
  opt.learning_rate = 0.5f;
  nn::sgd_step(model.parameters(), opt);

  nn::Tape after_tape(false);
  CHECK(model.extract(after_tape, x).value() != before);
}

TEST_CASE("zero weights and zero bias give a zero prediction") {
  for (std::size_t hidden : {std::size_t{0}, std::size_t{7}}) {
    PreviewModel model(config(4, 3, 0, hidden));
    nn::Rng rng(5);
    model.init(rng);
    for (auto* p : model.parameters()) p->fill(0.0f);
    auto a0 = predict_eval(model, {1.0f, -2.0f, 3.0f, 4.0f});
    CHECK(a0 == std::vector<float>(3, 0.0f));
  }
}

TEST_CASE("prediction is deterministic in eval mode; dropout only under training") {
  PreviewModel model(config(6, 8, 0, 0));
  nn::Rng rng(6);
  model.init(rng);
  std::vector<float> x{0.3f, 0.1f, -0.9f, 0.5f, 0.2f, 0.8f};
  const auto a = predict_eval(model, x);
  CHECK(predict_eval(model, x) == a);

  nn::Rng drop(7);
  bool differs = false;
  for (int trial = 0; trial < 10 && !differs; ++trial) {
    nn::Tape tape(false);
    auto h = model.extract(tape, x);
    differs = model.predict(h, &drop, true).value() != a;
  }
  CHECK(differs);
}

TEST_CASE("loss_pre: single seen class gives 0") {
  auto bank = data::ClassBank::from(attributes({4}, 2, {0.3f, 0.4f}), {0});
  CHECK(loss_of({1.5f, -2.0f}, 0, bank) == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("loss_pre: two classes with scores ln 2 and 0 give ln 1.5") {
  // phi(y) = (1, 0), phi(y') = (0, 1); a0 = (ln 2, 0).
  auto bank = data::ClassBank::from(attributes({1, 2}, 2, {1, 0, 0, 1}), {0, 1});
  const double l = loss_of({static_cast<float>(std::log(2.0)), 0.0f}, 0, bank);
  CHECK(l == doctest::Approx(std::log(1.5)).epsilon(1e-6));
  CHECK(l == doctest::Approx(0.405).epsilon(1e-3));
}

TEST_CASE("loss_pre: a0 equal to the true attribute beats a0 equal to another class") {
  auto bank = data::ClassBank::from(attributes({1, 2, 3}, 3, {2, 0, 0, 0, 2, 0, 0, 0, 2}), {0, 1, 2});
  const double right = loss_of({2, 0, 0}, 0, bank);
  const double wrong = loss_of({0, 2, 0}, 0, bank);
  CHECK(right < wrong);
}

TEST_CASE("loss_pre is non-negative for random inputs") {
  nn::Rng rng(8);
  std::vector<float> rows(5 * 4);
  for (auto& v : rows) v = rng.uniform(-1.0f, 1.0f);
  auto bank = data::ClassBank::from(attributes({1, 2, 3, 4, 5}, 4, rows), {0, 1, 2, 3, 4});
  for (int i = 0; i < 200; ++i) {
    std::vector<float> a(4);
    for (auto& v : a) v = rng.uniform(-5.0f, 5.0f);
    CHECK(loss_of(a, rng.index(5), bank) >= 0.0);
  }
}

TEST_CASE("class_probabilities: a distribution, scale-invariant under cosine, zero for a zero vector") {
  auto bank = data::ClassBank::from(attributes({1, 2, 3}, 2, {1, 0, 0, 1, 1, 1}), {0, 1, 2});
  std::vector<float> a{0.3f, 0.9f};
  auto p = data::class_probabilities(a, bank);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  std::vector<float> a3{0.9f, 2.7f};
  auto p3 = data::class_probabilities(a3, bank);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p3[i] == doctest::Approx(p[i]).epsilon(1e-6));

  // Cosine oracle by hand.
  const double na = std::sqrt(0.09 + 0.81);
  const double c[3] = {0.3 / na, 0.9 / na, 1.2 / (na * std::sqrt(2.0))};
  const double z = std::exp(c[0]) + std::exp(c[1]) + std::exp(c[2]);
  for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(std::exp(c[i]) / z).epsilon(1e-6));

  auto pd = data::class_probabilities(a, bank, data::ProbabilityForm::dot);
  const double d[3] = {0.3, 0.9, 1.2};
  const double zd = std::exp(d[0]) + std::exp(d[1]) + std::exp(d[2]);
  for (int i = 0; i < 3; ++i) CHECK(pd[i] == doctest::Approx(std::exp(d[i]) / zd).epsilon(1e-6));

  std::vector<float> zero{0.0f, 0.0f};
  CHECK(data::class_probabilities(zero, bank) == std::vector<float>(3, 0.0f));
}

TEST_CASE("preview cache matches a direct eval-mode pass") {
  data::SynthConfig sc;
  sc.n_seen_classes = 4;
  sc.n_unseen_classes = 2;
  sc.instances_per_class = 3;
  auto synth = data::synth_dataset(sc);
  PreviewModel model(config(synth.dataset.feature_dim(), synth.dataset.m(), 0, 0));
  nn::Rng rng(9);
  model.init(rng);
  PreviewCache cache(model, synth.dataset);
  REQUIRE(cache.size() == synth.dataset.size());
  for (std::size_t i = 0; i < cache.size(); ++i) {
    auto x = synth.dataset.instance(i);
    CHECK(cache[i].a0 == predict_eval(model, std::vector<float>(x.begin(), x.end())));
    CHECK(cache[i].h == std::vector<float>(x.begin(), x.end()));
  }
}
