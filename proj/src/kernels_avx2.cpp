#include <cmath>
#include <cstring>

#include "ces/kernels.hpp"

// AVX2/FMA variants of the reference kernels. Compiled with per-function
// target attributes so the translation unit builds on baseline x86-64; the
// dispatcher only hands these out after a cpuid check. Horizontal reductions
// use a fixed lane order, so results are deterministic per backend (they can
// differ from the scalar kernels in the last bits because the summation
// order differs).

#if defined(__x86_64__) || defined(_M_X64)
#define CES_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#else
#define CES_HAVE_AVX2_KERNELS 0
#endif

namespace ces::simd {

#if CES_HAVE_AVX2_KERNELS

namespace {

#define CES_AVX2 __attribute__((target("avx2,fma")))

CES_AVX2 inline double hsum(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d s2 = _mm_add_pd(lo, hi);
  const __m128d s1 = _mm_add_sd(s2, _mm_unpackhi_pd(s2, s2));
  return _mm_cvtsd_f64(s1);
}

CES_AVX2 double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

CES_AVX2 void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

CES_AVX2 void matvec_avx2(const double* W, const double* x, const double* bias, double* y,
                          std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot_avx2(W + r * cols, x, cols) + (bias ? bias[r] : 0.0);
  }
}

CES_AVX2 void matvec_t_avx2(const double* W, const double* d, double* out,
                            std::size_t rows, std::size_t cols) {
  std::memset(out, 0, cols * sizeof(double));
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_avx2(d[r], W + r * cols, out, cols);
  }
}

CES_AVX2 void rank1_avx2(double* W, const double* d, const double* x, double scale,
                         std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_avx2(scale * d[r], x, W + r * cols, cols);
  }
}

CES_AVX2 double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(t, t, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

CES_AVX2 void relu_avx2(const double* z, double* a, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(a + i, _mm256_max_pd(_mm256_loadu_pd(z + i), zero));
  }
  for (; i < n; ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

CES_AVX2 void relu_grad_mask_avx2(const double* z, double* dz, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(z + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dz + i, _mm256_and_pd(_mm256_loadu_pd(dz + i), mask));
  }
  for (; i < n; ++i) {
    if (z[i] <= 0.0) dz[i] = 0.0;
  }
}

CES_AVX2 void sgd_step_avx2(double* w, const double* g, double lr, double wd, std::size_t n) {
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d vwd = _mm256_set1_pd(wd);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vw = _mm256_loadu_pd(w + i);
    const __m256d vg = _mm256_fmadd_pd(vwd, vw, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(w + i, _mm256_fnmadd_pd(vlr, vg, vw));
  }
  for (; i < n; ++i) {
    w[i] -= lr * (g[i] + wd * w[i]);
  }
}

CES_AVX2 void adam_step_avx2(double* w, double* m, double* v, const double* g, double lr,
                             double b1, double b2, double eps, double wd, double bc1,
                             double bc2, std::size_t n) {
  const __m256d vb1 = _mm256_set1_pd(b1);
  const __m256d vb2 = _mm256_set1_pd(b2);
  const __m256d v1mb1 = _mm256_set1_pd(1.0 - b1);
  const __m256d v1mb2 = _mm256_set1_pd(1.0 - b2);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vwd = _mm256_set1_pd(wd);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d vbc1 = _mm256_set1_pd(bc1);
  const __m256d vbc2 = _mm256_set1_pd(bc2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vw = _mm256_loadu_pd(w + i);
    const __m256d vg = _mm256_fmadd_pd(vwd, vw, _mm256_loadu_pd(g + i));
    const __m256d vm = _mm256_fmadd_pd(vb1, _mm256_loadu_pd(m + i), _mm256_mul_pd(v1mb1, vg));
    const __m256d vv =
        _mm256_fmadd_pd(vb2, _mm256_loadu_pd(v + i), _mm256_mul_pd(v1mb2, _mm256_mul_pd(vg, vg)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_div_pd(vm, vbc1);
    const __m256d vhat = _mm256_div_pd(vv, vbc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    _mm256_storeu_pd(w + i, _mm256_sub_pd(vw, _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom)));
  }
  for (; i < n; ++i) {
    const double gi = g[i] + wd * w[i];
    m[i] = b1 * m[i] + (1.0 - b1) * gi;
    v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
    w[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

#undef CES_AVX2

}  // namespace

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const KernelTable& avx2_table() {
  static const KernelTable table = {
      dot_avx2,      axpy_avx2,        matvec_avx2,   matvec_t_avx2,
      rank1_avx2,    sum_sq_diff_avx2, relu_avx2,     relu_grad_mask_avx2,
      sgd_step_avx2, adam_step_avx2,
  };
  return table;
}

#else  // !CES_HAVE_AVX2_KERNELS

bool avx2_supported() { return false; }

const KernelTable& avx2_table() { return scalar_table(); }

#endif

}  // namespace ces::simd
