#pragma once

#include <cmath>

#include "trajstyle/numkit/kernels.hpp"

namespace trajstyle::numkit::kernels {

// One Adam element. Shared by every backend for tails so they stay
// bit-identical; translation units including this must not contract a*b+c.
inline void adam_element(double& p, double g, double& m, double& v, const AdamCoeffs& c) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * (g * g);
  const double m_hat = m / c.bias_correction1;
  const double v_hat = v / c.bias_correction2;
  p -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
}

const KernelTable* avx2_table_compiled();
const KernelTable* neon_table_compiled();

}  // namespace trajstyle::numkit::kernels
