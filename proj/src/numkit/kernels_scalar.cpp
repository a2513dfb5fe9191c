#include <cmath>

#include "kernels_impl.hpp"

namespace trajstyle::numkit::kernels {
namespace {

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c) {
  auto a_at = [&](std::size_t i, std::size_t p) { return trans_a ? a[p * m + i] : a[i * k + p]; };
  if (trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t p = 0; p < k; ++p) sum += a_at(i, p) * b[j * k + p];
        c[i * n + j] += sum;
      }
    }
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a_at(i, p);
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void adam(double* p, const double* g, double* m, double* v, std::size_t n, const AdamCoeffs& c) {
  for (std::size_t i = 0; i < n; ++i) {
    adam_element(p[i], g[i], m[i], v[i], c);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::scalar, "scalar", &gemm, &dot, &axpy, &adam};
  return table;
}

}  // namespace trajstyle::numkit::kernels
