// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rsr::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense f32 array with an optional same-shape gradient buffer.
///
/// Values must stay finite; `check_finite` is the enforcement point used by
/// the optimizer and the loaders.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<float> values);

  static Tensor vector(std::vector<float> values);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<float> values() noexcept { return values_; }
  std::span<const float> values() const noexcept { return values_; }
  std::vector<float>& storage() noexcept { return values_; }
  const std::vector<float>& storage() const noexcept { return values_; }

  float& operator[](std::size_t i) { return values_[i]; }
  float operator[](std::size_t i) const { return values_[i]; }

  bool has_grad() const noexcept { return grad_.has_value(); }
  std::span<float> grad();
  std::span<const float> grad() const;
  /// Allocates a zero gradient if absent and returns it.
  std::span<float> ensure_grad();
  void clear_grad() noexcept { grad_.reset(); }

  bool all_finite() const noexcept;
  /// Throws NumericError naming `what` when any value is NaN/Inf.
  void check_finite(const std::string& what) const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  Shape shape_;
  std::vector<float> values_;
  std::optional<std::vector<float>> grad_;
};

/// Bitwise equality of values (distinguishes -0.0 and NaN payloads).
bool bitwise_equal(std::span<const float> a, std::span<const float> b);

}  // namespace rsr::nn
