// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rsr/nn/parameter.hpp"
#include "rsr/nn/tape.hpp"

namespace rsr::nn {

/// A scalar function available at both precisions. The f32 route is the
/// production path whose analytic gradient is checked; the f64 route feeds
/// the central-difference oracle.
struct DifferentiableFunction {
  std::function<BasicVar<float>(BasicTape<float>&, BasicVar<float>)> f32;
  std::function<BasicVar<double>(BasicTape<double>&, BasicVar<double>)> f64;
};

/// Wraps a generic lambda `[](auto& tape, auto x) { ... }`.
template <class F>
DifferentiableFunction make_differentiable(F f) {
  return {[f](BasicTape<float>& t, BasicVar<float> x) { return f(t, x); },
          [f](BasicTape<double>& t, BasicVar<double> x) { return f(t, x); }};
}

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// Compares the f32 analytic gradient at `point` with f64 central
/// differences. Relative error per entry is |a - n| / max(|a|, |n|, floor).
GradCheckResult grad_check(const DifferentiableFunction& f, const std::vector<float>& point,
                           double step = 1e-3, double floor = 1e-2);

/// A scalar function of module parameters, at both precisions.
struct ParameterFunction {
  std::function<BasicVar<float>(BasicTape<float>&)> f32;
  std::function<BasicVar<double>(BasicTape<double>&)> f64;
};

template <class F>
ParameterFunction make_parameter_function(F f) {
  return {[f](BasicTape<float>& t) { return f(t); }, [f](BasicTape<double>& t) { return f(t); }};
}

/// Same comparison over every entry of `params`. Each perturbation is the
/// exact float-representable step, so rounding the weights does not bias
/// the quotient. Existing gradients are cleared.
GradCheckResult grad_check_parameters(const ParameterFunction& f, const ParameterList& params,
                                      double step = 1e-3, double floor = 1e-2);

}  // namespace rsr::nn
