#include "ces/data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ces/rng.hpp"

namespace ces {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("load_csv: non-numeric cell in column '" + col + "' at data row " +
                             std::to_string(row));
  }
  while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
  if (used != cell.size()) {
    throw std::runtime_error("load_csv: non-numeric cell in column '" + col + "' at data row " +
                             std::to_string(row));
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);

  std::size_t target_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == target_column) target_idx = i;
  }
  if (target_idx == header.size()) {
    throw std::runtime_error("load_csv: missing target column '" + target_column + "'");
  }

  Dataset ds;
  ds.target_name = target_column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != target_idx) ds.feature_names.push_back(header[i]);
  }

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("load_csv: row " + std::to_string(rows + 1) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double v = parse_cell(cells[i], rows + 1, header[i]);
      if (i == target_idx) {
        ds.y.push_back(v);
      } else {
        values.push_back(v);
      }
    }
    ++rows;
  }
  ds.X.rows = rows;
  ds.X.cols = header.size() - 1;
  ds.X.data = std::move(values);
  return ds;
}

void Standardizer::fit(const Matrix& X, std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::invalid_argument("Standardizer: empty fit split");
  mean.assign(X.cols, 0.0);
  scale.assign(X.cols, 1.0);
  for (std::size_t i : rows) {
    for (std::size_t c = 0; c < X.cols; ++c) mean[c] += X.at(i, c);
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  std::vector<double> var(X.cols, 0.0);
  for (std::size_t i : rows) {
    for (std::size_t c = 0; c < X.cols; ++c) {
      const double d = X.at(i, c) - mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < X.cols; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(rows.size()));
    scale[c] = sd > 0.0 ? sd : 1.0;  // constant column guard
  }
}

void Standardizer::apply(Matrix& X) const {
  if (mean.size() != X.cols) throw std::invalid_argument("Standardizer: not fitted for this width");
  for (std::size_t i = 0; i < X.rows; ++i) {
    for (std::size_t c = 0; c < X.cols; ++c) {
      X.at(i, c) = (X.at(i, c) - mean[c]) / scale[c];
    }
  }
}

void Standardizer::unapply(Matrix& X) const {
  if (mean.size() != X.cols) throw std::invalid_argument("Standardizer: not fitted for this width");
  for (std::size_t i = 0; i < X.rows; ++i) {
    for (std::size_t c = 0; c < X.cols; ++c) {
      X.at(i, c) = X.at(i, c) * scale[c] + mean[c];
    }
  }
}

double response_scale(std::span<const double> y, std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::invalid_argument("response_scale: empty fit split");
  double s = 0.0;
  for (std::size_t i : rows) s += std::abs(y[i]);
  s /= static_cast<double>(rows.size());
  return s > 0.0 ? s : 1.0;
}

Dataset synth_regression(std::size_t n, std::uint64_t seed, SynthKind kind) {
  Dataset ds;
  ds.X = Matrix(n, 2);
  ds.y.resize(n);
  ds.feature_names = {"x0", "x1"};
  ds.target_name = "y";
  Rng rng(derive_seed(seed, 0x5e6));
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = rng.uniform(-2.0, 2.0);
    const double x1 = rng.uniform(-2.0, 2.0);
    const double sigma = kind == SynthKind::homoscedastic ? 1.0 : 0.5 + std::abs(x0);
    ds.X.at(i, 0) = x0;
    ds.X.at(i, 1) = x1;
    ds.y[i] = x0 + 2.0 * std::sin(2.0 * x1) + sigma * rng.gauss();
  }
  return ds;
}

Dataset synth_classification(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("synth_classification: K >= 2 required");
  Dataset ds;
  ds.X = Matrix(n, 2);
  ds.y.resize(n);
  ds.feature_names = {"x0", "x1"};
  ds.target_name = "label";
  Rng rng(derive_seed(seed, 0xc1a));
  // exact class counts, order shuffled
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % k);
  const auto perm = rng.permutation(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[perm[i]];
    const double angle = 2.0 * std::numbers::pi * label / k;
    ds.X.at(i, 0) = 3.0 * std::cos(angle) + rng.gauss();
    ds.X.at(i, 1) = 3.0 * std::sin(angle) + rng.gauss();
    ds.y[i] = label;
  }
  return ds;
}

Dataset synth_outliers(std::size_t n_in, std::size_t n_out, std::uint64_t seed) {
  Dataset ds;
  ds.X = Matrix(n_in + n_out, 2);
  ds.y.resize(n_in + n_out);
  ds.feature_names = {"x0", "x1"};
  ds.target_name = "outlier";
  Rng rng(derive_seed(seed, 0x0d1));
  for (std::size_t i = 0; i < n_in; ++i) {
    ds.X.at(i, 0) = rng.gauss();
    ds.X.at(i, 1) = rng.gauss();
    ds.y[i] = 0.0;
  }
  for (std::size_t i = n_in; i < n_in + n_out; ++i) {
    const bool first = rng.uniform01() < 0.5;
    ds.X.at(i, 0) = (first ? 4.0 : 0.0) + rng.gauss();
    ds.X.at(i, 1) = (first ? 0.0 : 4.0) + rng.gauss();
    ds.y[i] = 1.0;
  }
  return ds;
}

}  // namespace ces
