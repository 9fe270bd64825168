// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "rsr/nn/kernels.hpp"
#include "rsr/nn/random.hpp"
#include "rsr/nn/tape.hpp"

/// Differentiable operations over BasicVar<T>. Every op records its result
/// on the operands' tape; vectors are rank-1, matrices row-major rank-2.
namespace rsr::nn {

namespace detail {

template <class T>
void require_same_size(BasicVar<T> a, BasicVar<T> b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": length " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

template <class T>
void require_scalar(BasicVar<T> a, const char* op) {
  if (a.size() != 1) throw DimensionError(std::string(op) + ": expected a scalar");
}

}  // namespace detail

template <class T>
BasicVar<T> add(BasicVar<T> a, BasicVar<T> b) {
  detail::require_same_size(a, b, "add");
  std::vector<T> out(a.value());
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), a.shape(), {a, b}, [ia, ib](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    for (std::size_t id : {ia, ib}) {
      if (!t.requires_grad(id)) continue;
      auto& s = t.grad_sink(id);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i];
    }
  });
}

template <class T>
BasicVar<T> sub(BasicVar<T> a, BasicVar<T> b) {
  detail::require_same_size(a, b, "sub");
  std::vector<T> out(a.value());
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), a.shape(), {a, b}, [ia, ib](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    if (t.requires_grad(ia)) {
      auto& s = t.grad_sink(ia);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i];
    }
    if (t.requires_grad(ib)) {
      auto& s = t.grad_sink(ib);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] -= g[i];
    }
  });
}

/// Element-wise product.
template <class T>
BasicVar<T> mul(BasicVar<T> a, BasicVar<T> b) {
  detail::require_same_size(a, b, "mul");
  std::vector<T> out(a.value());
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), a.shape(), {a, b}, [ia, ib](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    const auto& av = t.value_of(ia);
    const auto& bv = t.value_of(ib);
    if (t.requires_grad(ia)) {
      auto& s = t.grad_sink(ia);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i] * bv[i];
    }
    if (t.requires_grad(ib)) {
      auto& s = t.grad_sink(ib);
      for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i] * av[i];
    }
  });
}

template <class T>
BasicVar<T> scale(BasicVar<T> a, std::type_identity_t<T> c) {
  std::vector<T> out(a.value());
  for (T& x : out) x *= c;
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), a.shape(), {a}, [ia, c](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    auto& s = t.grad_sink(ia);
    for (std::size_t i = 0; i < g.size(); ++i) s[i] += c * g[i];
  });
}

template <class T>
BasicVar<T> add_scalar(BasicVar<T> a, std::type_identity_t<T> c) {
  std::vector<T> out(a.value());
  for (T& x : out) x += c;
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), a.shape(), {a}, [ia](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    auto& s = t.grad_sink(ia);
    for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i];
  });
}

/// Vector `a` times scalar node `s`.
template <class T>
BasicVar<T> scale_by(BasicVar<T> a, BasicVar<T> s) {
  detail::require_scalar(s, "scale_by");
  const T c = s.item();
  std::vector<T> out(a.value());
  for (T& x : out) x *= c;
  const std::size_t ia = a.id(), is = s.id();
  return a.tape().record(std::move(out), a.shape(), {a, s}, [ia, is](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    const T c = t.value_of(is)[0];
    if (t.requires_grad(ia)) {
      auto& sink = t.grad_sink(ia);
      for (std::size_t i = 0; i < g.size(); ++i) sink[i] += c * g[i];
    }
    if (t.requires_grad(is)) {
      const auto& av = t.value_of(ia);
      T acc = T(0);
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * av[i];
      t.grad_sink(is)[0] += acc;
    }
  });
}

namespace detail {

template <class T, class F, class D>
BasicVar<T> unary(BasicVar<T> a, F f, D dfdx_from_y_x) {
  std::vector<T> out(a.value());
  for (T& x : out) x = f(x);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), a.shape(), {a}, [ia, dfdx_from_y_x](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    const auto& y = t.value_of(self);
    const auto& x = t.value_of(ia);
    auto& s = t.grad_sink(ia);
    for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i] * dfdx_from_y_x(y[i], x[i]);
  });
}

}  // namespace detail

template <class T>
BasicVar<T> relu(BasicVar<T> a) {
  return detail::unary(
      a, [](T x) { return x > T(0) ? x : T(0); },
      [](T, T x) { return x > T(0) ? T(1) : T(0); });
}

template <class T>
BasicVar<T> sigmoid(BasicVar<T> a) {
  return detail::unary(
      a,
      [](T x) {
        return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
      },
      [](T y, T) { return y * (T(1) - y); });
}

template <class T>
BasicVar<T> tanh(BasicVar<T> a) {
  return detail::unary(
      a, [](T x) { return std::tanh(x); }, [](T y, T) { return T(1) - y * y; });
}

template <class T>
BasicVar<T> exp(BasicVar<T> a) {
  return detail::unary(
      a, [](T x) { return std::exp(x); }, [](T y, T) { return y; });
}

/// Natural log of max(x, floor); the clamp keeps log(0) finite.
template <class T>
BasicVar<T> log(BasicVar<T> a, std::type_identity_t<T> floor = T(0)) {
  return detail::unary(
      a, [floor](T x) { return std::log(std::max(x, floor)); },
      [floor](T, T x) { return x > floor ? T(1) / x : T(0); });
}

/// Element-wise min(a,b); the gradient follows the selected operand (a on ties).
template <class T>
BasicVar<T> minimum(BasicVar<T> a, BasicVar<T> b) {
  detail::require_same_size(a, b, "minimum");
  const auto& av = a.value();
  const auto& bv = b.value();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(av[i], bv[i]);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), a.shape(), {a, b}, [ia, ib](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    const auto& av = t.value_of(ia);
    const auto& bv = t.value_of(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t target = av[i] <= bv[i] ? ia : ib;
      if (t.requires_grad(target)) t.grad_sink(target)[i] += g[i];
    }
  });
}

/// Clamp into [lo, hi]; zero gradient outside the interval.
template <class T>
BasicVar<T> clamp(BasicVar<T> a, std::type_identity_t<T> lo, std::type_identity_t<T> hi) {
  return detail::unary(
      a, [lo, hi](T x) { return std::clamp(x, lo, hi); },
      [lo, hi](T, T x) { return (x >= lo && x <= hi) ? T(1) : T(0); });
}

/// y = W x (+ b). W has shape [n_out, n_in].
template <class T>
BasicVar<T> dense(BasicVar<T> x, BasicVar<T> w, std::optional<BasicVar<T>> b = std::nullopt) {
  const Shape& ws = w.shape();
  if (ws.size() != 2 || ws[1] != x.size()) {
    throw DimensionError("dense: weight " + shape_string(ws) + " vs input of length " +
                         std::to_string(x.size()));
  }
  const std::size_t n_out = ws[0], n_in = ws[1];
  std::vector<T> out = kernels::matvec<T>(w.value(), n_out, x.value());
  if (b) {
    if (b->size() != n_out) throw DimensionError("dense: bias length mismatch");
    const auto& bv = b->value();
    for (std::size_t i = 0; i < n_out; ++i) out[i] += bv[i];
  }
  const std::size_t ix = x.id(), iw = w.id();
  const std::optional<std::size_t> ib = b ? std::optional<std::size_t>(b->id()) : std::nullopt;
  std::vector<BasicVar<T>> inputs{x, w};
  if (b) inputs.push_back(*b);
  return x.tape().record(std::move(out), {n_out}, inputs,
                         [ix, iw, ib, n_out, n_in](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    const auto& xv = t.value_of(ix);
    const auto& wv = t.value_of(iw);
    if (t.requires_grad(iw)) {
      auto& s = t.grad_sink(iw);
      for (std::size_t r = 0; r < n_out; ++r) {
        if (g[r] == T(0)) continue;
        T* row = s.data() + r * n_in;
        for (std::size_t c = 0; c < n_in; ++c) row[c] += g[r] * xv[c];
      }
    }
    if (t.requires_grad(ix)) {
      auto& s = t.grad_sink(ix);
      for (std::size_t r = 0; r < n_out; ++r) {
        if (g[r] == T(0)) continue;
        const T* row = wv.data() + r * n_in;
        for (std::size_t c = 0; c < n_in; ++c) s[c] += g[r] * row[c];
      }
    }
    if (ib && t.requires_grad(*ib)) {
      auto& s = t.grad_sink(*ib);
      for (std::size_t r = 0; r < n_out; ++r) s[r] += g[r];
    }
  });
}

template <class T>
BasicVar<T> concat(const std::vector<BasicVar<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat of nothing");
  std::vector<T> out;
  std::vector<std::size_t> ids, offsets;
  for (const auto& p : parts) {
    ids.push_back(p.id());
    offsets.push_back(out.size());
    out.insert(out.end(), p.value().begin(), p.value().end());
  }
  const std::size_t n = out.size();
  return parts.front().tape().record(std::move(out), {n}, parts, [ids, offsets](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.requires_grad(ids[k])) continue;
      auto& s = t.grad_sink(ids[k]);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] += g[offsets[k] + i];
    }
  });
}

/// Contiguous sub-vector [offset, offset+len) of the flattened value.
template <class T>
BasicVar<T> slice(BasicVar<T> a, std::size_t offset, std::size_t len) {
  if (offset + len > a.size()) throw DimensionError("slice out of range");
  const auto& av = a.value();
  std::vector<T> out(av.begin() + static_cast<std::ptrdiff_t>(offset),
                     av.begin() + static_cast<std::ptrdiff_t>(offset + len));
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {len}, {a}, [ia, offset](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    auto& s = t.grad_sink(ia);
    for (std::size_t i = 0; i < g.size(); ++i) s[offset + i] += g[i];
  });
}

/// Same values, new shape.
template <class T>
BasicVar<T> reshape(BasicVar<T> a, Shape shape) {
  if (shape_size(shape) != a.size()) throw DimensionError("reshape: size mismatch");
  const std::size_t ia = a.id();
  return a.tape().record(a.value(), std::move(shape), {a}, [ia](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    auto& s = t.grad_sink(ia);
    for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i];
  });
}

template <class T>
BasicVar<T> pick(BasicVar<T> a, std::size_t index) {
  if (index >= a.size()) throw ContractError("pick: index out of range");
  return slice(a, index, 1);
}

template <class T>
BasicVar<T> sum(BasicVar<T> a) {
  T acc = T(0);
  for (T x : a.value()) acc += x;
  const std::size_t ia = a.id();
  return a.tape().record({acc}, {1}, {a}, [ia](BasicTape<T>& t, std::size_t self) {
    const T g = t.grad_of(self)[0];
    auto& s = t.grad_sink(ia);
    for (T& x : s) x += g;
  });
}

/// Stacks scalar nodes into one vector.
template <class T>
BasicVar<T> stack(const std::vector<BasicVar<T>>& scalars) {
  for (const auto& s : scalars) detail::require_scalar(s, "stack");
  return concat(scalars);
}

/// Sum of scalar nodes.
template <class T>
BasicVar<T> add_n(const std::vector<BasicVar<T>>& scalars) {
  return sum(stack(scalars));
}

template <class T>
BasicVar<T> dot(BasicVar<T> a, BasicVar<T> b) {
  detail::require_same_size(a, b, "dot");
  return sum(mul(a, b));
}

/// max(||a||, eps); the clamp makes the zero vector differentiable.
template <class T>
BasicVar<T> norm(BasicVar<T> a, std::type_identity_t<T> eps = T(1e-12)) {
  const T raw = kernels::norm<T>(a.value());
  const T n = std::max(raw, eps);
  const std::size_t ia = a.id();
  const bool clamped = raw < eps;
  return a.tape().record({n}, {1}, {a}, [ia, clamped](BasicTape<T>& t, std::size_t self) {
    if (clamped) return;
    const T g = t.grad_of(self)[0];
    const T n = t.value_of(self)[0];
    const auto& av = t.value_of(ia);
    auto& s = t.grad_sink(ia);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += g * av[i] / n;
  });
}

/// Scalar reciprocal.
template <class T>
BasicVar<T> reciprocal(BasicVar<T> a) {
  detail::require_scalar(a, "reciprocal");
  return detail::unary(
      a, [](T x) { return T(1) / x; }, [](T y, T) { return -y * y; });
}

/// a / max(||a||, eps).
template <class T>
BasicVar<T> normalize(BasicVar<T> a, std::type_identity_t<T> eps = T(1e-12)) {
  return scale_by(a, reciprocal(norm(a, eps)));
}

template <class T>
BasicVar<T> logsumexp(BasicVar<T> v) {
  const T lse = kernels::logsumexp<T>(v.value());
  const std::size_t iv = v.id();
  return v.tape().record({lse}, {1}, {v}, [iv](BasicTape<T>& t, std::size_t self) {
    const T g = t.grad_of(self)[0];
    const auto p = kernels::softmax<T>(t.value_of(iv));
    auto& s = t.grad_sink(iv);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += g * p[i];
  });
}

template <class T>
BasicVar<T> softmax(BasicVar<T> v) {
  std::vector<T> p = kernels::softmax<T>(v.value());
  const std::size_t iv = v.id();
  return v.tape().record(std::move(p), v.shape(), {v}, [iv](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    const auto& p = t.value_of(self);
    T gp = T(0);
    for (std::size_t i = 0; i < g.size(); ++i) gp += g[i] * p[i];
    auto& s = t.grad_sink(iv);
    for (std::size_t i = 0; i < g.size(); ++i) s[i] += p[i] * (g[i] - gp);
  });
}

/// -log softmax(scores)[target].
template <class T>
BasicVar<T> cross_entropy(BasicVar<T> scores, std::size_t target) {
  if (target >= scores.size()) {
    throw ContractError("cross_entropy: target " + std::to_string(target) + " outside " +
                        std::to_string(scores.size()) + " classes");
  }
  return sub(logsumexp(scores), pick(scores, target));
}

/// (u.v)/(|u||v|); throws DegenerateError on zero-norm input.
template <class T>
BasicVar<T> cosine_similarity(BasicVar<T> u, BasicVar<T> v) {
  detail::require_same_size(u, v, "cosine_similarity");
  if (kernels::norm<T>(u.value()) == T(0) || kernels::norm<T>(v.value()) == T(0)) {
    throw DegenerateError("cosine_similarity of a zero-norm vector");
  }
  return dot(normalize(u), normalize(v));
}

/// Inverted dropout: kept entries are scaled by 1/keep. Identity unless
/// `training` is set.
template <class T>
BasicVar<T> dropout(BasicVar<T> a, float keep, Rng* rng, bool training) {
  if (!training || keep >= 1.0f) return a;
  if (rng == nullptr) throw StateError("dropout in training mode needs an Rng");
  std::vector<T> mask(a.size());
  for (T& m : mask) m = rng->bernoulli(keep) ? T(1) / T(keep) : T(0);
  return mul(a, a.tape().constant(std::move(mask), a.shape()));
}

/// Log-softmax restricted to entries whose mask is true; masked entries get
/// -inf log-probability and receive no gradient.
template <class T>
BasicVar<T> masked_log_softmax(BasicVar<T> logits, const std::vector<bool>& allowed) {
  if (allowed.size() != logits.size()) throw DimensionError("masked_log_softmax: mask length");
  std::vector<T> kept;
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    if (allowed[i]) kept.push_back(logits.value()[i]);
  }
  if (kept.empty()) throw ContractError("masked_log_softmax: every action is masked");
  const T lse = kernels::logsumexp<T>(kept);
  std::vector<T> out(logits.size(), -std::numeric_limits<T>::infinity());
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    if (allowed[i]) out[i] = logits.value()[i] - lse;
  }
  const std::size_t il = logits.id();
  return logits.tape().record(std::move(out), logits.shape(), {logits}, [il, allowed](BasicTape<T>& t, std::size_t self) {
    const auto& g = t.grad_of(self);
    const auto& y = t.value_of(self);
    T gsum = T(0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (allowed[i]) gsum += g[i];
    }
    auto& s = t.grad_sink(il);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (allowed[i]) s[i] += g[i] - std::exp(y[i]) * gsum;
    }
  });
}

}  // namespace rsr::nn
