#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "ces/matrix.hpp"

namespace ces {

/// One result row per (method, trial). Fields that do not apply to a task
/// stay NaN and are written as empty CSV cells. `mean_size` is the mean
/// interval width for regression tasks and the mean set cardinality for
/// classification.
struct MetricsRow {
  std::string method;
  std::size_t sample_size = 0;
  double marginal_coverage = std::numeric_limits<double>::quiet_NaN();
  double conditional_coverage = std::numeric_limits<double>::quiet_NaN();
  double mean_size = std::numeric_limits<double>::quiet_NaN();
  double tpr = std::numeric_limits<double>::quiet_NaN();
  double fpr = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t trial_seed = 0;
};

extern const char* const kMetricsHeader;

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);

/// Worst-slab conditional coverage estimate. Candidate slabs
/// {x : a <= v.x <= b} of empirical mass >= delta are searched over
/// `n_directions` random unit directions on a selection split
/// (`split_fraction` of the points); the worst slab found is then evaluated
/// on the remaining points. Needs at least 50 points.
double wsc_coverage(const Matrix& X, const std::vector<std::uint8_t>& covered, double delta,
                    int n_directions, double split_fraction, std::uint64_t seed);

}  // namespace ces
