// SPDX-License-Identifier: Apache-2.0
#include "rsr/pipeline/gradient_suite.hpp"

#include <algorithm>

#include "rsr/nn/gradcheck.hpp"
#include "rsr/nn/layers.hpp"
#include "rsr/nn/ops.hpp"
#include "rsr/review/review.hpp"

namespace rsr::pipeline {

namespace {

std::vector<float> draw(nn::Rng& rng, std::size_t n, float lo, float hi) {
  std::vector<float> v(n);
  for (float& x : v) x = rng.uniform(lo, hi);
  return v;
}

template <class>
struct tape_scalar;
template <class T>
struct tape_scalar<nn::BasicTape<T>> {
  using type = T;
};

template <class F>
double worst_over(std::size_t points, F&& one) {
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) worst = std::max(worst, one());
  return worst;
}

}  // namespace

std::vector<GradientCheck> run_gradient_suite(std::uint64_t seed, std::size_t points) {
  nn::Rng rng(seed);
  std::vector<GradientCheck> out;
  auto add = [&](std::string op, double err) { out.push_back({std::move(op), points, err}); };

  {
    auto f = nn::make_differentiable([](auto&, auto p) {
      auto w = nn::reshape(nn::slice(p, 3, 6), {2, 3});
      auto b = nn::slice(p, 9, 2);
      return nn::sum(nn::tanh(nn::dense(nn::slice(p, 0, 3), w, std::optional<decltype(b)>(b))));
    });
    add("dense", worst_over(points, [&] { return nn::grad_check(f, draw(rng, 11, -1, 1)).max_relative_error; }));
  }
  {
    nn::GruCell cell("gru", 4, 3);
    const std::vector<float> c = {1.0f, -2.0f, 0.5f};
    add("gru_cell.inputs", worst_over(points, [&] {
      cell.init(rng);
      auto f = nn::make_differentiable([&cell, &c](auto& t, auto p) {
        using T = typename tape_scalar<std::decay_t<decltype(t)>>::type;
        return nn::dot(cell(nn::slice(p, 0, 4), nn::slice(p, 4, 3)), t.constant(std::vector<T>(c.begin(), c.end())));
      });
      return nn::grad_check(f, draw(rng, 7, -1, 1)).max_relative_error;
    }));
    nn::ParameterList params;
    cell.collect(params);
    add("gru_cell.weights", worst_over(points, [&] {
      cell.init(rng);
      const auto x = draw(rng, 4, -1, 1);
      const auto h = draw(rng, 3, -1, 1);
      auto f = nn::make_parameter_function([&](auto& t) {
        using T = typename tape_scalar<std::decay_t<decltype(t)>>::type;
        auto cv = [&t](const std::vector<float>& v) { return t.constant(std::vector<T>(v.begin(), v.end())); };
        return nn::dot(cell(cv(x), cv(h)), cv(c));
      });
      return nn::grad_check_parameters(f, params).max_relative_error;
    }));
  }
  {
    auto f = nn::make_differentiable([](auto& t, auto p) {
      return nn::dot(nn::softmax(p), t.constant({0.3, -1.0, 2.0, 0.5, -0.7}));
    });
    add("softmax", worst_over(points, [&] { return nn::grad_check(f, draw(rng, 5, -2, 2)).max_relative_error; }));
  }
  {
    add("cross_entropy", worst_over(points, [&] {
      const std::size_t target = rng.index(5);
      auto f = nn::make_differentiable([target](auto&, auto p) { return nn::cross_entropy(p, target); });
      return nn::grad_check(f, draw(rng, 5, -2, 2)).max_relative_error;
    }));
  }
  {
    auto f = nn::make_differentiable([](auto&, auto p) {
      return nn::cosine_similarity(nn::slice(p, 0, 4), nn::slice(p, 4, 4));
    });
    add("cosine", worst_over(points, [&] { return nn::grad_check(f, draw(rng, 8, -1, 1)).max_relative_error; }));
  }
  for (auto form : {review::JntForm::product, review::JntForm::cosine}) {
    // p = [a0 | at | phi], bank of 3 classes constant.
    const std::size_t m = 4;
    const auto bank = draw(rng, 3 * m, -1, 1);
    auto f = nn::make_differentiable([&bank, form](auto& t, auto p) {
      using T = typename tape_scalar<std::decay_t<decltype(t)>>::type;
      auto b = t.constant(std::vector<T>(bank.begin(), bank.end()), {3, m});
      return review::loss_jnt(nn::slice(p, 0, m), nn::slice(p, m, m), nn::slice(p, 2 * m, m), b, form);
    });
    add(form == review::JntForm::product ? "l_jnt" : "l_jnt.cosine",
        worst_over(points, [&] { return nn::grad_check(f, draw(rng, 3 * m, -1, 1)).max_relative_error; }));
  }
  return out;
}

bool gradient_suite_passes(const std::vector<GradientCheck>& checks, double tolerance) {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(),
                                        [tolerance](const auto& c) { return c.max_relative_error < tolerance; });
}

}  // namespace rsr::pipeline
