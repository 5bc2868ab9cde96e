#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ces {

/// Dense row-major matrix of doubles. Rows are samples, columns features.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  std::span<const double> row_span(std::size_t i) const { return {row(i), cols}; }
  std::span<double> row_span(std::size_t i) { return {row(i), cols}; }

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool empty() const { return rows == 0; }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= rows) throw std::out_of_range("Matrix::select_rows: index out of range");
      const double* src = row(idx[i]);
      std::copy(src, src + cols, out.row(i));
    }
    return out;
  }
};

}  // namespace ces
