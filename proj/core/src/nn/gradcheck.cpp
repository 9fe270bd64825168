// SPDX-License-Identifier: Apache-2.0
#include "rsr/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace rsr::nn {

GradCheckResult grad_check(const DifferentiableFunction& f, const std::vector<float>& point,
                           double step, double floor) {
  GradCheckResult result;
  {
    BasicTape<float> tape;
    auto x = tape.leaf(std::vector<float>(point));
    auto y = f.f32(tape, x);
    tape.backward(y);
    const auto g = tape.grad(x);
    result.analytic.assign(g.begin(), g.end());
  }
  result.numeric.resize(point.size());
  std::vector<double> base(point.begin(), point.end());
  for (std::size_t i = 0; i < point.size(); ++i) {
    auto eval = [&](double delta) {
      std::vector<double> p = base;
      p[i] += delta;
      BasicTape<double> tape(false);
      return f.f64(tape, tape.constant(std::move(p))).item();
    };
    result.numeric[i] = (eval(step) - eval(-step)) / (2.0 * step);
  }
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double a = result.analytic[i];
    const double n = result.numeric[i];
    const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

GradCheckResult grad_check_parameters(const ParameterFunction& f, const ParameterList& params, double step,
                                      double floor) {
  GradCheckResult result;
  for (Parameter* p : params) p->tensor.clear_grad();
  {
    BasicTape<float> tape;
    tape.backward(f.f32(tape));
  }
  for (Parameter* p : params) {
    if (p->tensor.has_grad()) {
      for (float g : p->tensor.grad()) result.analytic.push_back(g);
    } else {
      result.analytic.insert(result.analytic.end(), p->tensor.size(), 0.0);
    }
    p->tensor.clear_grad();
  }
  auto eval = [&f] {
    BasicTape<double> tape(false);
    return f.f64(tape).item();
  };
  for (Parameter* p : params) {
    auto& v = p->tensor.storage();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const float orig = v[i];
      const float hi = static_cast<float>(orig + step);
      const float lo = static_cast<float>(orig - step);
      v[i] = hi;
      const double fh = eval();
      v[i] = lo;
      const double fl = eval();
      v[i] = orig;
      result.numeric.push_back((fh - fl) / (static_cast<double>(hi) - static_cast<double>(lo)));
    }
  }
  for (std::size_t i = 0; i < result.analytic.size(); ++i) {
    const double a = result.analytic[i];
    const double n = result.numeric[i];
    const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace rsr::nn
