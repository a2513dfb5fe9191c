// AVX2 + FMA kernels. Functions carry a target attribute instead of compiling
// the whole file with -mavx2, so no AVX2 code leaks into shared inline
// instantiations picked up by other translation units.

#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define TRAJSTYLE_HAVE_AVX2_KERNELS 1
#include <immintrin.h>

#include <vector>
#endif

namespace trajstyle::numkit::kernels {

#if TRAJSTYLE_HAVE_AVX2_KERNELS

#define TS_AVX2 __attribute__((target("avx2,fma")))

namespace {

TS_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// C[R rows, 8 cols] += A[R, k] * B[k, 8]. A element (r, p) lives at
// a[r * a_row + p * a_col], which covers both A and A^T storage.
template <int R>
TS_AVX2 inline void block8(std::size_t k, const double* a, std::size_t a_row, std::size_t a_col,
                           const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  __m256d lo[R];
  __m256d hi[R];
  for (int r = 0; r < R; ++r) {
    lo[r] = _mm256_setzero_pd();
    hi[r] = _mm256_setzero_pd();
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
    const __m256d b1 = _mm256_loadu_pd(b + p * ldb + 4);
    for (int r = 0; r < R; ++r) {
      const __m256d av = _mm256_broadcast_sd(a + r * a_row + p * a_col);
      lo[r] = _mm256_fmadd_pd(av, b0, lo[r]);
      hi[r] = _mm256_fmadd_pd(av, b1, hi[r]);
    }
  }
  for (int r = 0; r < R; ++r) {
    double* crow = c + r * ldc;
    _mm256_storeu_pd(crow, _mm256_add_pd(_mm256_loadu_pd(crow), lo[r]));
    _mm256_storeu_pd(crow + 4, _mm256_add_pd(_mm256_loadu_pd(crow + 4), hi[r]));
  }
}

template <int R>
TS_AVX2 inline void block4(std::size_t k, const double* a, std::size_t a_row, std::size_t a_col,
                           const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  __m256d acc[R];
  for (int r = 0; r < R; ++r) acc[r] = _mm256_setzero_pd();
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d bv = _mm256_loadu_pd(b + p * ldb);
    for (int r = 0; r < R; ++r) {
      acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + r * a_row + p * a_col), bv, acc[r]);
    }
  }
  for (int r = 0; r < R; ++r) {
    double* crow = c + r * ldc;
    _mm256_storeu_pd(crow, _mm256_add_pd(_mm256_loadu_pd(crow), acc[r]));
  }
}

template <int R>
TS_AVX2 inline void block1(std::size_t k, const double* a, std::size_t a_row, std::size_t a_col,
                           const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (int r = 0; r < R; ++r) {
    double sum = 0.0;
    for (std::size_t p = 0; p < k; ++p) sum += a[r * a_row + p * a_col] * b[p * ldb];
    c[r * ldc] += sum;
  }
}

template <int R>
TS_AVX2 void row_panel(std::size_t n, std::size_t k, const double* a, std::size_t a_row,
                       std::size_t a_col, const double* b, double* c) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) block8<R>(k, a, a_row, a_col, b + j, n, c + j, n);
  for (; j + 4 <= n; j += 4) block4<R>(k, a, a_row, a_col, b + j, n, c + j, n);
  for (; j < n; ++j) block1<R>(k, a, a_row, a_col, b + j, n, c + j, n);
}

// Broadcast form: vectorizes along the columns of B.
TS_AVX2 void gemm_broadcast(bool trans_a, std::size_t m, std::size_t n, std::size_t k,
                            const double* a, const double* b, double* c) {
  const std::size_t a_row = trans_a ? 1 : k;
  const std::size_t a_col = trans_a ? m : 1;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) row_panel<4>(n, k, a + i * a_row, a_row, a_col, b, c + i * n);
  for (; i < m; ++i) row_panel<1>(n, k, a + i * a_row, a_row, a_col, b, c + i * n);
}

TS_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

// Dot form: A rows and B rows (B stored [n,k]) are both contiguous in k.
TS_AVX2 void gemm_dot(std::size_t m, std::size_t n, std::size_t k, const double* a,
                      const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d s0 = _mm256_setzero_pd();
      __m256d s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd();
      __m256d s3 = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const __m256d av = _mm256_loadu_pd(arow + p);
        s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
        s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
        s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
        s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
      }
      double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
      for (; p < k; ++p) {
        t0 += arow[p] * b0[p];
        t1 += arow[p] * b1[p];
        t2 += arow[p] * b2[p];
        t3 += arow[p] * b3[p];
      }
      crow[j] += t0;
      crow[j + 1] += t1;
      crow[j + 2] += t2;
      crow[j + 3] += t3;
    }
    for (; j < n; ++j) crow[j] += dot_avx2(arow, b + j * k, k);
  }
}

std::vector<double> transpose(const double* src, std::size_t rows, std::size_t cols) {
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t col = 0; col < cols; ++col) out[col * rows + r] = src[r * cols + col];
  }
  return out;
}

TS_AVX2 void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                  const double* a, const double* b, double* c) {
  if (m == 0 || n == 0 || k == 0) return;
  if (trans_b) {
    if (trans_a) {
      const std::vector<double> at = transpose(a, k, m);
      gemm_dot(m, n, k, at.data(), b, c);
    } else {
      gemm_dot(m, n, k, a, b, c);
    }
    return;
  }
  // Narrow outputs (e.g. 3 channels) waste the column vectorization; switch
  // to the dot form over a transposed B.
  if (n < 4 && k >= 16) {
    const std::vector<double> bt = transpose(b, k, n);
    if (trans_a) {
      const std::vector<double> at = transpose(a, k, m);
      gemm_dot(m, n, k, at.data(), bt.data(), c);
    } else {
      gemm_dot(m, n, k, a, bt.data(), c);
    }
    return;
  }
  gemm_broadcast(trans_a, m, n, k, a, b, c);
}

TS_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Mirrors adam_element operation by operation (no FMA) so results are
// bit-identical to the scalar reference.
TS_AVX2 void adam(double* p, const double* g, double* m, double* v, std::size_t n,
                  const AdamCoeffs& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d one_b1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d one_b2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d eps = _mm256_set1_pd(c.epsilon);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    const __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(one_b1, gv));
    const __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(one_b2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d m_hat = _mm256_div_pd(mv, bc1);
    const __m256d v_hat = _mm256_div_pd(vv, bc2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) adam_element(p[i], g[i], m[i], v[i], c);
}

}  // namespace

const KernelTable* avx2_table_compiled() {
  static const KernelTable table{Backend::avx2, "avx2", &gemm, &dot_avx2, &axpy, &adam};
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_table_compiled() { return nullptr; }

#endif

}  // namespace trajstyle::numkit::kernels
