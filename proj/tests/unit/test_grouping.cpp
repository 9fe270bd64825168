// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "rsr/errors.hpp"
#include "rsr/grouping/analysis.hpp"
#include "rsr/grouping/grouping.hpp"
#include "support/oracles.hpp"

using namespace rsr;
using namespace rsr::grouping;

namespace {

GroupingConfig small_config(std::size_t k, std::size_t m) {
  GroupingConfig c;
  c.embed_input = 6;
  c.m = m;
  c.k = k;
  c.embed_dim = 5;
  c.hidden = 7;
  return c;
}

std::vector<float> run_net(const GroupingNet& net, const std::vector<float>& h, const std::vector<float>& a0) {
  nn::Tape tape(false);
  auto g = net(tape.constant(h), tape.constant(a0));
  CHECK(g.shape() == nn::Shape{net.k(), net.m()});
  return g.value();
}

std::vector<float> random_vector(nn::Rng& rng, std::size_t n, float lo = -1.0f, float hi = 1.0f) {
  std::vector<float> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

GroupMatrix matrix(std::size_t k, std::size_t m, std::vector<float> w) { return GroupMatrix{k, m, std::move(w)}; }

// Sparse row helper: {index, weight} pairs over m criteria.
std::vector<float> sparse(std::size_t m, std::vector<std::pair<std::size_t, float>> entries) {
  std::vector<float> row(m, 0.0f);
  for (auto [j, w] : entries) row[j] = w;
  return row;
}

}  // namespace

TEST_CASE("grouping net output has shape k x m and is non-negative") {
  GroupingNet net(small_config(4, 9));
  nn::Rng rng(11);
  net.init(rng);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = run_net(net, random_vector(rng, 6, -3, 3), random_vector(rng, 9, -3, 3));
    REQUIRE(g.size() == 36);
    for (float v : g) CHECK(v >= 0.0f);
  }
}

TEST_CASE("all-negative pre-activations give a zero group matrix") {
  GroupingNet net(small_config(3, 5));
  nn::Rng rng(12);
  net.init(rng);
  for (auto* p : net.parameters()) {
    if (p->name == "grouping.out.weight") p->fill(0.0f);
    if (p->name == "grouping.out.bias") p->fill(-1.0f);
  }
  auto g = run_net(net, random_vector(rng, 6), random_vector(rng, 5));
  CHECK(g == std::vector<float>(15, 0.0f));
}

TEST_CASE("k = 1 gives a single mask over all m criteria") {
  GroupingNet net(small_config(1, 8));
  nn::Rng rng(13);
  net.init(rng);
  CHECK(run_net(net, random_vector(rng, 6), random_vector(rng, 8)).size() == 8);
}

TEST_CASE("oracle grouping returns the fixed masks for any input") {
  auto c = small_config(2, 4);
  c.oracle_masks = block_masks({{0, 1}, {2, 3}}, 4);
  GroupingNet net(c);
  nn::Rng rng(14);
  net.init(rng);
  const std::vector<float> expect{1, 1, 0, 0, 0, 0, 1, 1};
  CHECK(run_net(net, random_vector(rng, 6), random_vector(rng, 4)) == expect);
  CHECK(run_net(net, random_vector(rng, 6), random_vector(rng, 4)) == expect);
}

TEST_CASE("oracle masks are validated") {
  auto c = small_config(2, 4);
  c.oracle_masks = {std::vector<float>(4, 1.0f)};
  CHECK_THROWS_AS(GroupingNet{c}, ConfigError);
  c.oracle_masks = {std::vector<float>(4, 1.0f), std::vector<float>(3, 1.0f)};
  CHECK_THROWS_AS(GroupingNet{c}, ConfigError);
  c.oracle_masks = {std::vector<float>(4, 1.0f), {0, -1, 0, 0}};
  CHECK_THROWS_AS(GroupingNet{c}, ConfigError);
}

TEST_CASE("block_masks puts ones on each block") {
  auto masks = block_masks({{0, 3}, {1}, {2, 4}}, 5);
  REQUIRE(masks.size() == 3);
  CHECK(masks[0] == std::vector<float>{1, 0, 0, 1, 0});
  CHECK(masks[1] == std::vector<float>{0, 1, 0, 0, 0});
  CHECK(masks[2] == std::vector<float>{0, 0, 1, 0, 1});
}

TEST_CASE("representative_set and top_indices") {
  // m = 20 -> ceil(0.1 * 20) = 2 criteria.
  auto row = sparse(20, {{4, 0.5f}, {9, 0.9f}, {13, 0.5f}, {2, 0.1f}});
  CHECK(representative_set(row) == std::vector<std::size_t>{4, 9});  // tie 4 vs 13 goes low
  CHECK(representative_set(sparse(20, {{7, 0.3f}})) == std::vector<std::size_t>{7});
  CHECK(representative_set(std::vector<float>(20, 0.0f)).empty());
  CHECK(representative_set(row, 0.25) == std::vector<std::size_t>{2, 4, 9, 13});

  std::vector<float> v{0.1f, 5.0f, 5.0f, -1.0f, 3.0f};
  CHECK(top_indices(v, 2) == std::vector<std::size_t>{1, 2});
  CHECK(top_indices(v, 3) == std::vector<std::size_t>{1, 2, 4});
  CHECK(top_indices(v, 10).size() == 5);
}

TEST_CASE("top-10 shot accuracy: groups equal to the ground truth give 1") {
  data::AttributeMatrix attr;
  attr.class_ids = {0, 1};
  attr.m = 20;
  for (std::size_t j = 0; j < 20; ++j) attr.values.push_back(static_cast<float>(j) + 1.0f);
  for (std::size_t j = 0; j < 20; ++j) attr.values.push_back(20.0f - static_cast<float>(j));
  std::vector<GroupMatrix> groups;
  for (std::size_t y : {0, 1, 1}) {
    auto r = attr.row(y);
    groups.push_back(matrix(1, 20, std::vector<float>(r.begin(), r.end())));
  }
  CHECK(top10_shot_accuracy(groups, attr, {0, 1, 1}) == 1.0);
}

TEST_CASE("top-10 shot accuracy: 3-instance hand dataset") {
  data::AttributeMatrix attr;
  attr.class_ids = {0, 1};
  attr.m = 20;
  // Class 0 strongest criteria: 10..19. Class 1: 0..9.
  for (std::size_t j = 0; j < 20; ++j) attr.values.push_back(static_cast<float>(j) + 1.0f);
  for (std::size_t j = 0; j < 20; ++j) attr.values.push_back(20.0f - static_cast<float>(j));

  auto join = [](std::vector<float> a, const std::vector<float>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  std::vector<GroupMatrix> groups{
      // representatives {3, 12} and {0}: group 0 hits via 12, group 1 misses
      matrix(2, 20, join(sparse(20, {{12, 0.9f}, {3, 0.5f}, {4, 0.1f}}), sparse(20, {{0, 1.0f}}))),
      // {15, 16} and {19} against class 1: nothing hits
      matrix(2, 20, join(sparse(20, {{15, 1.0f}, {16, 1.0f}}), sparse(20, {{19, 0.3f}}))),
      // {18, 19} (criterion 2 drops out of the top 10%) misses, {5} hits
      matrix(2, 20, join(sparse(20, {{2, 0.4f}, {18, 0.8f}, {19, 0.9f}}), sparse(20, {{5, 0.2f}}))),
  };
  std::vector<std::size_t> labels{0, 1, 1};
  CHECK(top10_shot_accuracy(groups, attr, labels) == doctest::Approx(2.0 / 3.0));
  CHECK(top10_shot_accuracy(groups, attr, labels, ShotMode::per_group) == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(top10_shot_accuracy({}, attr, {}), ContractError);
  CHECK_THROWS_AS(top10_shot_accuracy(groups, attr, {0}), DimensionError);
}

TEST_CASE("sparsity degree") {
  CHECK(sparsity_degree(std::vector<float>(6, 0.3f)) == doctest::Approx(1.0));
  std::vector<float> g{0.2f, 0.0f, 0.8f};
  CHECK(sparsity_degree(g) == doctest::Approx(4.0));
  CHECK_THROWS_AS(sparsity_degree(std::vector<float>(3, 0.0f)), DegenerateError);
  std::vector<float> neg{0.2f, -0.1f};
  CHECK_THROWS_AS(sparsity_degree(neg), ContractError);
}

TEST_CASE("semantic tendency: k = 1 hand example") {
  data::ManualGroups manual{{"a", {1, 2}}, {"b", {3, 4}}};
  // m = 20 so the representative set has two members: {1, 3}.
  auto g = matrix(1, 20, sparse(20, {{1, 0.7f}, {3, 0.6f}}));
  auto chain = tendency_chain(g, manual);
  REQUIRE(chain);
  CHECK(chain->o[0] == doctest::Approx(0.5));
  CHECK(chain->o[1] == doctest::Approx(0.5));
  CHECK(chain->no[0] == doctest::Approx(0.70710678).epsilon(1e-7));
  CHECK(chain->no[1] == doctest::Approx(0.70710678).epsilon(1e-7));
  CHECK(std::abs(chain->ro[0] - 0.5) < 1e-6);
  CHECK(std::abs(chain->ro[1] - 0.5) < 1e-6);
}

TEST_CASE("semantic tendency: a group equal to a manual group has an indicator o row") {
  data::ManualGroups manual{{"a", {5, 6}}, {"b", {0, 1, 2}}};
  auto g = matrix(1, 20, sparse(20, {{5, 1.0f}, {6, 1.0f}}));
  auto chain = tendency_chain(g, manual);
  REQUIRE(chain);
  CHECK(chain->o == std::vector<double>{1.0, 0.0});
}

TEST_CASE("semantic tendency: unannotated representatives") {
  data::ManualGroups manual{{"a", {0}}, {"b", {1}}};
  auto none = matrix(1, 20, sparse(20, {{9, 1.0f}}));
  CHECK_FALSE(tendency_chain(none, manual));
  auto all_zero = matrix(2, 20, std::vector<float>(40, 0.0f));
  CHECK_FALSE(tendency_chain(all_zero, manual));

  auto ok = matrix(1, 20, sparse(20, {{0, 1.0f}}));
  auto t = semantic_tendency({ok, none, matrix(1, 20, std::vector<float>(20, 0.0f))}, manual);
  CHECK(t.skipped_instances == 2);
  auto single = tendency_chain(ok, manual);
  REQUIRE(single);
  for (std::size_t i = 0; i < t.mean_ro.size(); ++i) CHECK(t.mean_ro[i] == doctest::Approx(single->ro[i]));
}

TEST_CASE("semantic tendency: do over identical instances equals the single ro") {
  data::ManualGroups manual{{"a", {1, 2}}, {"b", {3, 4}}, {"c", {7}}};
  auto g = matrix(2, 20, [] {
    auto r0 = sparse(20, {{1, 0.2f}, {7, 0.9f}});
    auto r1 = sparse(20, {{3, 0.5f}, {4, 0.4f}, {2, 0.1f}});
    r0.insert(r0.end(), r1.begin(), r1.end());
    return r0;
  }());
  auto chain = tendency_chain(g, manual);
  REQUIRE(chain);
  auto t = semantic_tendency(std::vector<GroupMatrix>(5, g), manual);
  CHECK(t.skipped_instances == 0);
  for (std::size_t i = 0; i < t.mean_ro.size(); ++i) CHECK(t.mean_ro[i] == doctest::Approx(chain->ro[i]));
}

TEST_CASE("semantic tendency: randomized 3-group case matches the brute-force chain") {
  nn::Rng rng(15);
  const std::size_t m = 30, k = 3;
  std::vector<std::size_t> perm(m);
  for (std::size_t j = 0; j < m; ++j) perm[j] = j;
  rng.shuffle(perm);
  data::ManualGroups manual{{"function", {}}, {"material", {}}, {"lighting", {}}, {"spatial", {}}};
  for (std::size_t j = 0; j < m; ++j) manual[j % 4].second.push_back(perm[j]);

  std::vector<GroupMatrix> all;
  std::vector<double> expected_do(k * manual.size(), 0.0);
  std::size_t defined = 0;
  for (int x = 0; x < 200; ++x) {
    std::vector<float> w(k * m);
    for (auto& v : w) v = rng.bernoulli(0.6) ? 0.0f : rng.uniform(0.0f, 1.0f);
    auto g = matrix(k, m, w);
    all.push_back(g);
    auto oracle = oracle::tendency_chain(g, manual);
    auto chain = tendency_chain(g, manual);
    REQUIRE(static_cast<bool>(chain) == oracle.defined);
    if (!chain) continue;
    ++defined;
    for (std::size_t i = 0; i < oracle.o.size(); ++i) {
      CHECK(std::abs(chain->o[i] - oracle.o[i]) < 1e-6);
      CHECK(std::abs(chain->no[i] - oracle.no[i]) < 1e-6);
      CHECK(std::abs(chain->ro[i] - oracle.ro[i]) < 1e-6);
      expected_do[i] += oracle.ro[i];
    }
    for (std::size_t i = 0; i < k; ++i) {
      double row = 0.0;
      for (std::size_t s = 0; s < manual.size(); ++s) row += chain->ro[i * manual.size() + s];
      CHECK(std::abs(row - 1.0) < 1e-9);
    }
  }
  auto t = semantic_tendency(all, manual);
  CHECK(t.skipped_instances == all.size() - defined);
  for (std::size_t i = 0; i < expected_do.size(); ++i) {
    CHECK(std::abs(t.mean_ro[i] - expected_do[i] / static_cast<double>(defined)) < 1e-6);
  }
}

TEST_CASE("weight histogram") {
  std::vector<float> ten{0.5f, 0.1f, 0.9f, 0.3f, 0.2f, 1.0f, 0.8f, 0.4f, 0.6f, 0.7f};
  auto h = weight_histogram(ten);
  REQUIRE(h.buckets.size() == 10);
  CHECK_FALSE(h.coarse);
  for (const auto& b : h.buckets) {
    CHECK(b.count == 1);
    CHECK(b.lo == b.hi);
  }
  CHECK(h.buckets.front().lo == 0.1f);
  CHECK(h.buckets.back().hi == 1.0f);

  auto same = weight_histogram(std::vector<float>(30, 0.25f));
  for (const auto& b : same.buckets) {
    CHECK(b.lo == 0.25f);
    CHECK(b.hi == 0.25f);
  }

  nn::Rng rng(16);
  std::vector<float> w(100);
  for (auto& v : w) v = rng.uniform(0.01f, 2.0f);
  auto with_zeros = w;
  with_zeros.insert(with_zeros.begin() + 17, 7, 0.0f);
  auto sorted = w;
  std::sort(sorted.begin(), sorted.end());
  auto hr = weight_histogram(with_zeros);
  CHECK(hr.nonzero == 100);
  REQUIRE(hr.buckets.size() == 10);
  for (std::size_t b = 0; b < 10; ++b) {
    CHECK(hr.buckets[b].count == 10);
    CHECK(hr.buckets[b].lo == sorted[10 * b]);
    CHECK(hr.buckets[b].hi == sorted[10 * b + 9]);
  }

  auto coarse = weight_histogram(std::vector<float>{0.0f, 0.3f, 0.1f, 0.2f});
  CHECK(coarse.coarse);
  CHECK(coarse.buckets.size() == 3);
  CHECK_THROWS_AS(weight_histogram(ten, 0), ContractError);
}

TEST_CASE("analysis report serializes every section") {
  data::AttributeMatrix attr;
  attr.class_ids = {0};
  attr.m = 20;
  for (std::size_t j = 0; j < 20; ++j) attr.values.push_back(static_cast<float>(j) + 1.0f);
  data::ManualGroups manual{{"low", {0, 1, 2}}, {"high", {17, 18, 19}}};
  auto g = matrix(1, 20, sparse(20, {{18, 0.4f}, {19, 0.8f}, {0, 0.2f}}));
  auto r = analyze_groups({g}, attr, {0}, manual);
  CHECK(r.top10_shot_accuracy == 1.0);
  CHECK(r.sparsity_degree == doctest::Approx(4.0));
  auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["manual_groups"].size() == 2);
  CHECK(j["semantic_tendency"].size() == 1);
  CHECK(j["weight_histogram"]["nonzero"] == 3);
  CHECK(j["weight_histogram"]["coarse"] == true);
}
