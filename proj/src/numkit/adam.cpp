#include "trajstyle/numkit/adam.hpp"

#include <cmath>

#include "trajstyle/error.hpp"
#include "trajstyle/numkit/kernels.hpp"

namespace trajstyle::numkit {

AdamState AdamState::for_parameters(std::span<Tensor* const> params) {
  AdamState state;
  for (const Tensor* p : params) {
    state.first_moment.push_back(Tensor::zeros_like(*p));
    state.second_moment.push_back(Tensor::zeros_like(*p));
  }
  return state;
}

AdamState AdamState::for_parameters(std::span<const Tensor* const> params) {
  AdamState state;
  for (const Tensor* p : params) {
    state.first_moment.push_back(Tensor::zeros_like(*p));
    state.second_moment.push_back(Tensor::zeros_like(*p));
  }
  return state;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               double lr) {
  if (!(lr > 0.0)) throw ValueError("adam_step: learning rate must be > 0");
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    grads[i].require_shape(params[i]->shape(), "adam_step gradient");
    state.first_moment[i].require_shape(params[i]->shape(), "adam_step first moment");
    state.second_moment[i].require_shape(params[i]->shape(), "adam_step second moment");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const kernels::AdamCoeffs coeffs{state.beta1,
                                   state.beta2,
                                   state.epsilon,
                                   lr,
                                   1.0 - std::pow(state.beta1, t),
                                   1.0 - std::pow(state.beta2, t)};
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    kt.adam(params[i]->data(), grads[i].data(), state.first_moment[i].data(),
            state.second_moment[i].data(), params[i]->size(), coeffs);
  }
}

}  // namespace trajstyle::numkit
