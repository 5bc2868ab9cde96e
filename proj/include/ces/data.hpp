#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ces/matrix.hpp"

namespace ces {

struct Dataset {
  Matrix X;
  std::vector<double> y;
  std::vector<std::string> feature_names;
  std::string target_name;

  std::size_t size() const { return X.rows; }
};

/// Reads a headered, comma-separated, numeric CSV. The named target column
/// becomes `y`; all remaining columns become features in file order.
Dataset load_csv(const std::string& path, const std::string& target_column);

/// Per-column affine standardization. Parameters are fit on a subset of rows
/// (the training split) and applied everywhere, so no test statistics leak
/// into the transform. Columns with zero variance get unit scale.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  void fit(const Matrix& X, std::span<const std::size_t> rows);
  void apply(Matrix& X) const;
  void unapply(Matrix& X) const;
};

/// Mean absolute value of y over the given rows (>= guard 1 when zero);
/// used to rescale regression responses.
double response_scale(std::span<const double> y, std::span<const std::size_t> rows);

enum class SynthKind { homoscedastic, heteroscedastic };

/// Synthetic regression data: x ~ U(-2,2)^2,
///   y = x0 + 2 sin(2 x1) + sigma(x) * eps,  eps ~ N(0,1),
/// with sigma(x) = 1 (homoscedastic) or sigma(x) = 0.5 + |x0| (heteroscedastic).
Dataset synth_regression(std::size_t n, std::uint64_t seed, SynthKind kind);

/// Gaussian mixture with K classes: class k has mean 3*(cos, sin)(2 pi k/K)
/// and identity covariance; class counts match the equal priors exactly.
Dataset synth_classification(std::size_t n, int k, std::uint64_t seed);

/// Inliers ~ N(0, I_2) (label 0); outliers (label 1) from an equal mixture of
/// N((4,0), I) and N((0,4), I). Inliers come first.
Dataset synth_outliers(std::size_t n_in, std::size_t n_out, std::uint64_t seed);

}  // namespace ces
