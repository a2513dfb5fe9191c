#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops behind every layer and optimizer. Each backend
// provides the same table; the scalar table is the reference the SIMD tables
// are tested against. The active table is picked once from the CPU (or the
// TRAJSTYLE_KERNELS environment variable: scalar, avx2, neon, auto) and can be
// overridden with select_backend().
//
// Results are deterministic per backend. gemm/dot/axpy may differ from the
// scalar reference in the last bits (FMA, summation order); adam is
// bit-identical across backends.
namespace trajstyle::numkit::kernels {

enum class Backend { scalar, avx2, neon };

struct AdamCoeffs {
  double beta1;
  double beta2;
  double epsilon;
  double lr;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Backend backend;
  const char* name;

  // C[m,n] += op(A)[m,k] * op(B)[k,n], all row-major and contiguous.
  // trans_a: A is stored [k,m]. trans_b: B is stored [n,k].
  void (*gemm)(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
               const double* a, const double* b, double* c);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // Bias-corrected Adam on n parameters, in place on p, m, v.
  void (*adam)(double* p, const double* g, double* m, double* v, std::size_t n,
               const AdamCoeffs& coeffs);
};

const KernelTable& scalar_table();
// nullptr when the backend was not compiled in or the CPU lacks support.
const KernelTable* avx2_table();
const KernelTable* neon_table();

bool backend_available(Backend backend);
Backend best_backend();
std::string_view backend_name(Backend backend);

const KernelTable& active();
// Throws ValueError when the backend is unavailable on this machine.
void select_backend(Backend backend);

// RAII override used by equivalence tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend backend);
  ~ScopedBackend();
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace trajstyle::numkit::kernels
