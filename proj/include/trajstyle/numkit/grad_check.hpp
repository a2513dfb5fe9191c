#pragma once

#include <functional>
#include <span>
#include <vector>

namespace trajstyle::numkit {

// A scalar function together with its analytic gradient.
struct DifferentiableFunction {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

// Max over coordinates of |analytic - fd| / max(|analytic|, |fd|, 1e-12),
// where fd is the central difference with the given step. Throws
// NonFiniteError when any evaluation is not finite.
double grad_check(const DifferentiableFunction& function, std::span<const double> point,
                  double step = 1e-5);

}  // namespace trajstyle::numkit
