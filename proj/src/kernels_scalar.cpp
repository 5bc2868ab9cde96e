#include <cmath>
#include <cstring>

#include "ces/kernels.hpp"

// Reference kernels. Plain sequential loops; these define the bit-exact
// behaviour the SIMD variants are tested against (up to summation order).

namespace ces::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_scalar(const double* W, const double* x, const double* bias, double* y,
                   std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot_scalar(W + r * cols, x, cols) + (bias ? bias[r] : 0.0);
  }
}

void matvec_t_scalar(const double* W, const double* d, double* out,
                     std::size_t rows, std::size_t cols) {
  std::memset(out, 0, cols * sizeof(double));
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_scalar(d[r], W + r * cols, out, cols);
  }
}

void rank1_scalar(double* W, const double* d, const double* x, double scale,
                  std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_scalar(scale * d[r], x, W + r * cols, cols);
  }
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

void relu_scalar(const double* z, double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void relu_grad_mask_scalar(const double* z, double* dz, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i] <= 0.0) dz[i] = 0.0;
  }
}

void sgd_step_scalar(double* w, const double* g, double lr, double wd, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    w[i] -= lr * (g[i] + wd * w[i]);
  }
}

void adam_step_scalar(double* w, double* m, double* v, const double* g, double lr,
                      double b1, double b2, double eps, double wd, double bc1, double bc2,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i] + wd * w[i];
    m[i] = b1 * m[i] + (1.0 - b1) * gi;
    v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      dot_scalar,     axpy_scalar,        matvec_scalar,   matvec_t_scalar,
      rank1_scalar,   sum_sq_diff_scalar, relu_scalar,     relu_grad_mask_scalar,
      sgd_step_scalar, adam_step_scalar,
  };
  return table;
}

}  // namespace ces::simd
