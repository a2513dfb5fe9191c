#include "trajstyle/numkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

#include "trajstyle/error.hpp"

namespace trajstyle::numkit {

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

void check_rank(const Shape& shape) {
  if (shape.empty() || shape.size() > 3) {
    throw ShapeError("tensor rank must be 1..3, got shape " + to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_rank(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_rank(shape_);
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + to_string(shape_));
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     to_string(shape_));
  }
  return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  check_rank(shape);
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::require_finite(const char* what) const {
  if (!all_finite()) throw NonFiniteError(std::string(what) + ": non-finite value");
}

void Tensor::require_shape(const Shape& expected, const char* what) const {
  if (shape_ != expected) {
    throw ShapeError(std::string(what) + ": expected shape " + to_string(expected) + ", got " +
                     to_string(shape_));
  }
}

Tensor concat_features(std::initializer_list<const Tensor*> parts) {
  std::size_t batch = 0;
  std::size_t width = 0;
  for (const Tensor* p : parts) {
    if (p->rank() != 2) throw ShapeError("concat_features: parts must be rank 2");
    if (width == 0 && batch == 0) batch = p->dim(0);
    if (p->dim(0) != batch) throw ShapeError("concat_features: batch sizes differ");
    width += p->dim(1);
  }
  Tensor out({batch, width});
  for (std::size_t b = 0; b < batch; ++b) {
    double* row = out.data() + b * width;
    for (const Tensor* p : parts) {
      const std::size_t n = p->dim(1);
      std::memcpy(row, p->data() + b * n, n * sizeof(double));
      row += n;
    }
  }
  return out;
}

std::vector<Tensor> split_features(const Tensor& whole, std::initializer_list<std::size_t> widths) {
  if (whole.rank() != 2) throw ShapeError("split_features: input must be rank 2");
  const std::size_t batch = whole.dim(0);
  const std::size_t total = std::accumulate(widths.begin(), widths.end(), std::size_t{0});
  if (total != whole.dim(1)) throw ShapeError("split_features: widths do not sum to feature count");
  std::vector<Tensor> out;
  std::size_t offset = 0;
  for (std::size_t n : widths) {
    Tensor part({batch, n});
    for (std::size_t b = 0; b < batch; ++b) {
      std::memcpy(part.data() + b * n, whole.data() + b * total + offset, n * sizeof(double));
    }
    out.push_back(std::move(part));
    offset += n;
  }
  return out;
}

Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) throw ShapeError("stack: no items");
  const Shape& inner = items.front().shape();
  if (inner.size() >= 3) throw ShapeError("stack: items must be rank 1 or 2");
  Shape shape{items.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  Tensor out(shape);
  const std::size_t n = items.front().size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].require_shape(inner, "stack");
    std::memcpy(out.data() + i * n, items[i].data(), n * sizeof(double));
  }
  return out;
}

}  // namespace trajstyle::numkit
