#include "gcs/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define GCS_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define GCS_HAVE_AVX2_BUILD 0
#endif

#include <cmath>

namespace gcs::kernels {

#if GCS_HAVE_AVX2_BUILD
namespace {

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  alignas(32) double buf[4];
  _mm256_store_pd(buf, acc);
  double s = buf[0] + buf[1] + buf[2] + buf[3];
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void scale_avx2(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void gemm_nn_avx2(const double* A, const double* B, double* C,
                  std::size_t r, std::size_t k, std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) {
    const double* a = A + i * k;
    double* crow = C + i * c;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[p];
      if (av == 0.0) continue;
      axpy_avx2(av, B + p * c, crow, c);
    }
  }
}

void gemm_tn_avx2(const double* A, const double* B, double* C,
                  std::size_t r, std::size_t k, std::size_t c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = A + p * r;
    const double* brow = B + p * c;
    for (std::size_t i = 0; i < r; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      axpy_avx2(av, brow, C + i * c, c);
    }
  }
}

void gemm_nt_avx2(const double* A, const double* B, double* C,
                  std::size_t r, std::size_t k, std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) {
    const double* a = A + i * k;
    double* crow = C + i * c;
    for (std::size_t j = 0; j < c; ++j) {
      crow[j] += dot_avx2(a, B + j * k, k);
    }
  }
}

void relu_avx2(const double* x, double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_max_pd(zero, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_avx2(const double* pre, const double* g_in, double* g_out,
                        std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(g_out + i, _mm256_and_pd(mask, _mm256_loadu_pd(g_in + i)));
  }
  for (; i < n; ++i) g_out[i] = pre[i] > 0.0 ? g_in[i] : 0.0;
}

void adam_update_avx2(double* w, double* m, double* v, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double b1t, double b2t) {
  const double mc = 1.0 / (1.0 - b1t);
  const double vc = 1.0 / (1.0 - b2t);
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
  const __m256d vmc = _mm256_set1_pd(mc);
  const __m256d vvc = _mm256_set1_pd(vc);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    __m256d vm = _mm256_fmadd_pd(vb1c, vg, _mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)));
    __m256d vv = _mm256_fmadd_pd(vb2c, _mm256_mul_pd(vg, vg),
                                 _mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    const __m256d num = _mm256_mul_pd(vm, vmc);
    const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, vvc)), veps);
    const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(num, den));
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    w[i] -= lr * (m[i] * mc) / (std::sqrt(v[i] * vc) + eps);
  }
}

}  // namespace

const Ops* avx2_ops() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) {
    return nullptr;
  }
  static const Ops ops{
      "avx2",        axpy_avx2,    dot_avx2,
      scale_avx2,    gemm_nn_avx2, gemm_tn_avx2,
      gemm_nt_avx2,  relu_avx2,    relu_backward_avx2,
      adam_update_avx2,
  };
  return &ops;
}

#else

const Ops* avx2_ops() { return nullptr; }

#endif

}  // namespace gcs::kernels
