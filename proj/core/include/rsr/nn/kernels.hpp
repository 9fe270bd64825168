// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "rsr/errors.hpp"

/// Plain numeric kernels shared by the tape ops and gradient-free code paths.
namespace rsr::nn::kernels {

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  T acc = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <class T>
T norm(std::span<const T> a) {
  return std::sqrt(dot(a, a));
}

/// max-shifted log(sum(exp(v))).
template <class T>
T logsumexp(std::span<const T> v) {
  if (v.empty()) throw DimensionError("logsumexp of an empty vector");
  const T hi = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(hi)) return hi;
  T acc = T(0);
  for (T x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

template <class T>
std::vector<T> softmax(std::span<const T> v) {
  if (v.empty()) throw DimensionError("softmax of an empty vector");
  const T hi = *std::max_element(v.begin(), v.end());
  std::vector<T> out(v.size());
  T acc = T(0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - hi);
    acc += out[i];
  }
  for (T& x : out) x /= acc;
  return out;
}

/// Cosine similarity; throws DegenerateError on a zero-norm operand.
template <class T>
T cosine(std::span<const T> u, std::span<const T> v) {
  const T nu = norm(u);
  const T nv = norm(v);
  if (nu == T(0) || nv == T(0)) throw DegenerateError("cosine similarity of a zero-norm vector");
  return std::clamp(dot(u, v) / (nu * nv), T(-1), T(1));
}

/// Row-major matrix [rows x cols] times vector.
template <class T>
std::vector<T> matvec(std::span<const T> m, std::size_t rows, std::span<const T> x) {
  const std::size_t cols = x.size();
  if (m.size() != rows * cols) throw DimensionError("matvec: shape mismatch");
  std::vector<T> out(rows, T(0));
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = m.data() + r * cols;
    T acc = T(0);
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
  return out;
}

template <class T>
std::size_t argmax(std::span<const T> v) {
  if (v.empty()) throw DimensionError("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace rsr::nn::kernels
