// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "rsr/errors.hpp"
#include "rsr/nn/parameter.hpp"
#include "rsr/nn/tensor.hpp"

namespace rsr::nn {

template <class T>
class BasicTape;

/// Handle to one recorded value on a tape. Cheap to copy.
template <class T>
class BasicVar {
 public:
  BasicVar() = default;
  BasicVar(BasicTape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const noexcept { return tape_ != nullptr; }
  std::size_t id() const noexcept { return id_; }
  BasicTape<T>& tape() const { return *tape_; }

  const std::vector<T>& value() const { return tape_->value(*this); }
  const Shape& shape() const { return tape_->shape(*this); }
  std::size_t size() const { return value().size(); }
  T item() const;
  T operator[](std::size_t i) const { return value()[i]; }

 private:
  BasicTape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode recording of a computation.
///
/// Nodes are appended in evaluation order; `backward` walks them in reverse.
/// Parameters enter through `param`, memoized per tape, and receive their
/// accumulated gradient (as f32) when `backward` completes. A tape built with
/// `grad_enabled == false` records values only.
template <class T>
class BasicTape {
 public:
  using Var = BasicVar<T>;
  using BackwardFn = std::function<void(BasicTape&, std::size_t)>;

  explicit BasicTape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  BasicTape(const BasicTape&) = delete;
  BasicTape& operator=(const BasicTape&) = delete;

  bool grad_enabled() const noexcept { return grad_enabled_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  Var constant(std::vector<T> values, Shape shape = {}) {
    return push(std::move(values), std::move(shape), false, nullptr);
  }
  Var constant(std::span<const float> values, Shape shape = {}) {
    return constant(std::vector<T>(values.begin(), values.end()), std::move(shape));
  }
  Var constant(const Tensor& t) { return constant(t.values(), t.shape()); }

  /// Leaf that collects a gradient (differentiation target for grad checks).
  Var leaf(std::vector<T> values, Shape shape = {}) {
    return push(std::move(values), std::move(shape), grad_enabled_, nullptr);
  }

  Var param(Parameter& p) {
    if (auto it = param_index_.find(&p); it != param_index_.end()) return Var(this, it->second);
    const auto& src = p.tensor.storage();
    Var v = push(std::vector<T>(src.begin(), src.end()), p.tensor.shape(),
                 grad_enabled_ && p.trainable, grad_enabled_ && p.trainable ? &p : nullptr);
    param_index_.emplace(&p, v.id());
    return v;
  }

  const std::vector<T>& value(Var v) const { return nodes_.at(v.id()).value; }
  const Shape& shape(Var v) const { return nodes_.at(v.id()).shape; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return requires_grad(v.id()); }

  /// Gradient of the last backward pass; zeros when none reached `v`.
  std::vector<T> grad(Var v) const {
    const Node& n = nodes_.at(v.id());
    if (n.grad.empty()) return std::vector<T>(n.value.size(), T(0));
    return n.grad;
  }

  /// Records an op result. The backward closure is dropped when no input
  /// needs a gradient.
  Var record(std::vector<T> value, Shape shape, std::initializer_list<Var> inputs,
             BackwardFn fn) {
    bool needs = false;
    if (grad_enabled_) {
      for (const Var& in : inputs) needs = needs || requires_grad(in);
    }
    Var v = push(std::move(value), std::move(shape), needs, nullptr);
    if (needs) nodes_.back().backward = std::move(fn);
    return v;
  }
  Var record(std::vector<T> value, Shape shape, const std::vector<Var>& inputs,
             BackwardFn fn) {
    bool needs = false;
    if (grad_enabled_) {
      for (const Var& in : inputs) needs = needs || requires_grad(in);
    }
    Var v = push(std::move(value), std::move(shape), needs, nullptr);
    if (needs) nodes_.back().backward = std::move(fn);
    return v;
  }

  // Accessors for op backward closures.
  const std::vector<T>& value_of(std::size_t id) const { return nodes_[id].value; }
  const std::vector<T>& grad_of(std::size_t id) const { return nodes_[id].grad; }
  /// Gradient buffer of `id`, zero-allocated on first use.
  std::vector<T>& grad_sink(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
    return n.grad;
  }

  /// Back-propagates from a scalar node and flushes parameter gradients.
  void backward(Var root) {
    if (!grad_enabled_) throw StateError("backward on a tape without gradients");
    if (value(root).size() != 1) throw DimensionError("backward root must be a scalar");
    if (backward_done_) throw StateError("backward already run on this tape");
    backward_done_ = true;
    if (!requires_grad(root)) return;
    grad_sink(root.id())[0] = T(1);
    for (std::size_t id = root.id() + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (n.backward && !n.grad.empty()) n.backward(*this, id);
    }
    for (const auto& [param, id] : param_index_) {
      Node& n = nodes_[id];
      if (n.param == nullptr) continue;
      auto g = n.param->tensor.ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += static_cast<float>(n.grad[i]);
    }
  }

 private:
  struct Node {
    std::vector<T> value;
    std::vector<T> grad;
    Shape shape;
    BackwardFn backward;
    bool requires_grad = false;
    Parameter* param = nullptr;
  };

  Var push(std::vector<T> values, Shape shape, bool requires_grad, Parameter* param) {
    if (shape.empty()) shape = {values.size()};
    if (shape_size(shape) != values.size()) {
      throw DimensionError("tape value of shape " + shape_string(shape) + " given " +
                           std::to_string(values.size()) + " values");
    }
    nodes_.push_back(Node{std::move(values), {}, std::move(shape), {}, requires_grad, param});
    return Var(this, nodes_.size() - 1);
  }

  bool grad_enabled_;
  bool backward_done_ = false;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_index_;
};

template <class T>
T BasicVar<T>::item() const {
  const auto& v = value();
  if (v.size() != 1) throw DimensionError("item() on a non-scalar value");
  return v[0];
}

using Tape = BasicTape<float>;
using Var = BasicVar<float>;

/// Copies a tape value out as an f32 tensor of the same shape.
template <class T>
Tensor to_tensor(BasicVar<T> v) {
  const auto& src = v.value();
  return Tensor(v.shape(), std::vector<float>(src.begin(), src.end()));
}

}  // namespace rsr::nn
