// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rsr::pipeline {

struct GradientCheck {
  std::string op;
  std::size_t points = 0;
  double max_relative_error = 0.0;  // worst over all points and entries
};

/// Finite-difference checks of every differentiable building block at
/// `points` random points each: dense, GRU cell (inputs and weights),
/// softmax, cross-entropy, cosine, and the L_JNT composite in both forms.
std::vector<GradientCheck> run_gradient_suite(std::uint64_t seed, std::size_t points = 10);

bool gradient_suite_passes(const std::vector<GradientCheck>& checks, double tolerance = 1e-4);

}  // namespace rsr::pipeline
