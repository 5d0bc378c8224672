#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by the dense and sparse linear algebra.
// A scalar reference implementation always exists; an AVX2/FMA variant is
// selected at runtime when the CPU supports it. Set GCS_KERNELS=scalar or
// GCS_KERNELS=avx2 to force a backend (used by the equivalence tests).
namespace gcs::kernels {

struct Ops {
  const char* name;

  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);

  // Row-major GEMM accumulating into C (caller clears C if needed).
  // gemm_nn: C(r x c) += A(r x k) * B(k x c)
  // gemm_tn: C(r x c) += A(k x r)^T * B(k x c)
  // gemm_nt: C(r x c) += A(r x k) * B(c x k)^T
  void (*gemm_nn)(const double* A, const double* B, double* C,
                  std::size_t r, std::size_t k, std::size_t c);
  void (*gemm_tn)(const double* A, const double* B, double* C,
                  std::size_t r, std::size_t k, std::size_t c);
  void (*gemm_nt)(const double* A, const double* B, double* C,
                  std::size_t r, std::size_t k, std::size_t c);

  void (*relu)(const double* x, double* y, std::size_t n);
  // g_out = g_in where pre > 0, else 0 (subgradient at 0 is 0)
  void (*relu_backward)(const double* pre, const double* g_in, double* g_out,
                        std::size_t n);

  // Bias-corrected Adam update, in place. b1t/b2t are beta1^t/beta2^t.
  void (*adam_update)(double* w, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double b1t, double b2t);
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when unavailable on this CPU/build

// Backend chosen at first use (env override, then cpuid).
const Ops& active();
std::string_view active_name();

}  // namespace gcs::kernels
