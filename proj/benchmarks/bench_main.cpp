// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "rsr/grouping/grouping.hpp"
#include "rsr/nn/layers.hpp"
#include "rsr/nn/optimizer.hpp"
#include "rsr/review/episode.hpp"

using namespace rsr;

namespace {

std::vector<float> random_vector(nn::Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = rng.uniform(-1.0f, 1.0f);
  return v;
}

void BM_DenseForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  nn::Rng rng(1);
  nn::Dense layer("bench", n, n);
  layer.init(rng);
  nn::ParameterList params;
  layer.collect(params);
  const auto x = random_vector(rng, n);
  for (auto _ : state) {
    nn::Tape tape;
    tape.backward(nn::sum(layer(tape.leaf(x))));
    nn::zero_grad(params);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_DenseForwardBackward)->Arg(64)->Arg(256)->Arg(1024);

void BM_GruStep(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  nn::Rng rng(2);
  nn::GruCell cell("bench", h, h);
  cell.init(rng);
  nn::ParameterList params;
  cell.collect(params);
  const auto x = random_vector(rng, h);
  const auto h0 = random_vector(rng, h);
  for (auto _ : state) {
    nn::Tape tape;
    tape.backward(nn::sum(cell(tape.leaf(x), tape.leaf(h0))));
    nn::zero_grad(params);
  }
}
BENCHMARK(BM_GruStep)->Arg(32)->Arg(128);

// Inference episode at the synthetic-task sizes: m = 16, k = 4, 25 classes.
void BM_ReviewEpisode(benchmark::State& state) {
  constexpr std::size_t kM = 16, kK = 4, kH = 64, kClasses = 25;
  nn::Rng rng(3);
  grouping::GroupingConfig gc;
  gc.embed_input = kH;
  gc.m = kM;
  gc.k = kK;
  review::RevisionConfig rc;
  rc.embed_input = kH;
  rc.m = kM;
  grouping::GroupingNet grouping(gc);
  review::RevisionModule revision(rc);
  grouping.init(rng);
  revision.init(rng);
  data::AttributeMatrix attrs;
  attrs.m = kM;
  std::vector<std::size_t> all;
  for (std::size_t c = 0; c < kClasses; ++c) {
    attrs.class_ids.push_back(static_cast<data::ClassId>(c));
    all.push_back(c);
  }
  attrs.values = random_vector(rng, kClasses * kM);
  const auto bank = data::ClassBank::from(attrs, all);
  review::RandomSelector selector(rng);
  review::EpisodeOptions opt;
  opt.review.k = kK;
  opt.confidence_bank = &bank;
  opt.loss_bank = &bank;
  opt.early_stop = false;
  const preview::PreviewOutputs pre{random_vector(rng, kH), random_vector(rng, kM)};
  for (auto _ : state) {
    auto traj = review::review_episode(pre, {&grouping, &revision}, selector, opt);
    benchmark::DoNotOptimize(traj.steps.data());
  }
}
BENCHMARK(BM_ReviewEpisode);

}  // namespace

BENCHMARK_MAIN();
