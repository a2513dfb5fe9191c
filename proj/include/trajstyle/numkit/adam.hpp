#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trajstyle/numkit/tensor.hpp"

namespace trajstyle::numkit {

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Zero moments shaped like `params`.
  static AdamState for_parameters(std::span<Tensor* const> params);
  static AdamState for_parameters(std::span<const Tensor* const> params);
};

// One bias-corrected Adam update over every parameter. Throws ShapeError when
// params, grads and moments disagree and ValueError when lr <= 0.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               double lr);

}  // namespace trajstyle::numkit
