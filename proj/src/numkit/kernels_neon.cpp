// NEON (AArch64 Advanced SIMD) kernels. NEON is baseline on AArch64, so no
// runtime probe is needed; on other targets the table is absent.

#include "kernels_impl.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <vector>
#endif

namespace trajstyle::numkit::kernels {

#if defined(__aarch64__)

namespace {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c) {
  if (trans_b) {
    std::vector<double> at;
    const double* arows = a;
    if (trans_a) {
      at.resize(m * k);
      for (std::size_t p = 0; p < k; ++p)
        for (std::size_t i = 0; i < m; ++i) at[i * k + p] = a[p * m + i];
      arows = at.data();
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(arows + i * k, b + j * k, k);
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = trans_a ? a[p * m + i] : a[i * k + p];
      axpy(av, b + p * n, c + i * n, n);
    }
  }
}

void adam(double* p, const double* g, double* m, double* v, std::size_t n, const AdamCoeffs& c) {
  const float64x2_t b1 = vdupq_n_f64(c.beta1);
  const float64x2_t one_b1 = vdupq_n_f64(1.0 - c.beta1);
  const float64x2_t b2 = vdupq_n_f64(c.beta2);
  const float64x2_t one_b2 = vdupq_n_f64(1.0 - c.beta2);
  const float64x2_t bc1 = vdupq_n_f64(c.bias_correction1);
  const float64x2_t bc2 = vdupq_n_f64(c.bias_correction2);
  const float64x2_t lr = vdupq_n_f64(c.lr);
  const float64x2_t eps = vdupq_n_f64(c.epsilon);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t gv = vld1q_f64(g + i);
    const float64x2_t mv = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(one_b1, gv));
    const float64x2_t vv =
        vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(one_b2, vmulq_f64(gv, gv)));
    vst1q_f64(m + i, mv);
    vst1q_f64(v + i, vv);
    const float64x2_t step = vdivq_f64(vmulq_f64(lr, vdivq_f64(mv, bc1)),
                                       vaddq_f64(vsqrtq_f64(vdivq_f64(vv, bc2)), eps));
    vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
  }
  for (; i < n; ++i) adam_element(p[i], g[i], m[i], v[i], c);
}

}  // namespace

const KernelTable* neon_table_compiled() {
  static const KernelTable table{Backend::neon, "neon", &gemm, &dot, &axpy, &adam};
  return &table;
}

#else

const KernelTable* neon_table_compiled() { return nullptr; }

#endif

}  // namespace trajstyle::numkit::kernels
