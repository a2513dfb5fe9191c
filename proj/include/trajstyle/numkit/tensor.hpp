#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace trajstyle::numkit {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major tensor of rank 1..3 holding 64-bit floats. A default
// constructed tensor is empty (rank 0) and is only a placeholder.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  // Same data, new shape; sizes must agree.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  void fill(double value);
  bool all_finite() const noexcept;

  // Throws NonFiniteError naming `what` when any element is NaN or Inf.
  void require_finite(const char* what) const;
  // Throws ShapeError naming `what` when the shape differs from `expected`.
  void require_shape(const Shape& expected, const char* what) const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Concatenate rank-2 tensors [B, n_i] along the feature axis.
Tensor concat_features(std::initializer_list<const Tensor*> parts);
// Split a rank-2 gradient [B, sum n_i] back into its parts.
std::vector<Tensor> split_features(const Tensor& whole, std::initializer_list<std::size_t> widths);

// Stack equally shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> items);

}  // namespace trajstyle::numkit
