#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by network training and evaluation.
// A scalar reference implementation always exists; an AVX2 variant is
// selected at runtime when the CPU supports it. The two are equivalence-
// tested against each other (they differ only in summation order).

namespace ces::simd {

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + bias, W row-major (rows x cols); bias may be null
  void (*matvec)(const double* W, const double* x, const double* bias, double* y,
                 std::size_t rows, std::size_t cols);
  // out = W^T d (out has cols entries, overwritten)
  void (*matvec_t)(const double* W, const double* d, double* out,
                   std::size_t rows, std::size_t cols);
  // W += scale * d x^T
  void (*rank1_update)(double* W, const double* d, const double* x, double scale,
                       std::size_t rows, std::size_t cols);
  // sum_i (a[i] - b[i])^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  // a = max(z, 0)
  void (*relu)(const double* z, double* a, std::size_t n);
  // dz[i] = z[i] > 0 ? dz[i] : 0
  void (*relu_grad_mask)(const double* z, double* dz, std::size_t n);
  // w -= lr * (g + wd * w)
  void (*sgd_step)(double* w, const double* g, double lr, double wd, std::size_t n);
  // Adam update with precomputed bias corrections bc1 = 1-b1^t, bc2 = 1-b2^t
  void (*adam_step)(double* w, double* m, double* v, const double* g, double lr,
                    double b1, double b2, double eps, double wd, double bc1, double bc2,
                    std::size_t n);
};

enum class Backend { scalar, avx2 };

const KernelTable& scalar_table();
const KernelTable& avx2_table();
bool avx2_supported();

Backend active_backend();
void set_backend(Backend b);

/// Accepts "scalar", "avx2" or "auto". Returns false on unknown or
/// unsupported names.
bool set_backend(std::string_view name);

const char* backend_name();

/// Active kernel table.
const KernelTable& k();

}  // namespace ces::simd
