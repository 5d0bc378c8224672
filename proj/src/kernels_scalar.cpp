#include "gcs/kernels.hpp"

#include <cmath>

namespace gcs::kernels {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void gemm_nn_scalar(const double* A, const double* B, double* C,
                    std::size_t r, std::size_t k, std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) {
    const double* a = A + i * k;
    double* crow = C + i * c;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[p];
      if (av == 0.0) continue;
      const double* brow = B + p * c;
      for (std::size_t j = 0; j < c; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_tn_scalar(const double* A, const double* B, double* C,
                    std::size_t r, std::size_t k, std::size_t c) {
  // A is k x r, B is k x c; C += A^T B, streamed over the shared k rows.
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = A + p * r;
    const double* brow = B + p * c;
    for (std::size_t i = 0; i < r; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = C + i * c;
      for (std::size_t j = 0; j < c; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt_scalar(const double* A, const double* B, double* C,
                    std::size_t r, std::size_t k, std::size_t c) {
  // B is c x k; C_ij += <A_i, B_j>
  for (std::size_t i = 0; i < r; ++i) {
    const double* a = A + i * k;
    double* crow = C + i * c;
    for (std::size_t j = 0; j < c; ++j) {
      crow[j] += dot_scalar(a, B + j * k, k);
    }
  }
}

void relu_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_scalar(const double* pre, const double* g_in, double* g_out,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) g_out[i] = pre[i] > 0.0 ? g_in[i] : 0.0;
}

void adam_update_scalar(double* w, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double b1t, double b2t) {
  const double mc = 1.0 / (1.0 - b1t);
  const double vc = 1.0 / (1.0 - b2t);
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    w[i] -= lr * (m[i] * mc) / (std::sqrt(v[i] * vc) + eps);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{
      "scalar",        axpy_scalar,    dot_scalar,
      scale_scalar,    gemm_nn_scalar, gemm_tn_scalar,
      gemm_nt_scalar,  relu_scalar,    relu_backward_scalar,
      adam_update_scalar,
  };
  return ops;
}

}  // namespace gcs::kernels
