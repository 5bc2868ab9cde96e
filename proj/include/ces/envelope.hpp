#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ces {

/// Curve y -> c + (y - mu)^2. All members of a family share the unit leading
/// coefficient, so two distinct members intersect at most once.
struct ShiftedParabola {
  std::size_t index = 0;  // model index within the family
  double c = 0.0;         // vertical offset (hold-out loss of the model)
  double mu = 0.0;        // vertex (model prediction at the test point)
};

/// Curve y -> c + rho_beta(y, yhat). A family shares beta, so two distinct
/// members intersect at most once.
struct ShiftedPinball {
  std::size_t index = 0;
  double c = 0.0;
  double yhat = 0.0;
  double beta = 0.5;
};

double curve_value(const ShiftedParabola& p, double y);
double curve_value(const ShiftedPinball& p, double y);

/// Piecewise-constant argmin map: segment l covers (knots[l-1], knots[l]]
/// with implicit knots[-1] = -inf and knots[L] = +inf. segment_indices has
/// one entry per segment and adjacent entries differ.
struct StepFunction {
  std::vector<double> knots;
  std::vector<std::size_t> segment_indices;

  std::size_t segment_count() const { return segment_indices.size(); }
  /// Index of the segment containing y (half-open on the left).
  std::size_t segment_at(double y) const;
  /// Model index selected at y.
  std::size_t index_at(double y) const { return segment_indices[segment_at(y)]; }
};

/// Lower envelope via divide-and-conquer merging, O(T log T). Ties between
/// coincident curves resolve to the lowest model index.
StepFunction parabola_lower_envelope(std::span<const ShiftedParabola> family);
StepFunction pinball_lower_envelope(std::span<const ShiftedPinball> family);

/// Joint refinement of two envelopes: the merged sorted knot list and, per
/// merged interval, the pair (index in `low`, index in `high`). Duplicate
/// knots produce zero-width intervals, which downstream interval logic skips
/// naturally.
struct MergedPartition {
  std::vector<double> knots;
  std::vector<std::pair<std::size_t, std::size_t>> segment_pairs;
};

MergedPartition concat_and_sort_knots(const StepFunction& low, const StepFunction& high);

/// Linear-scan argmin oracle; ties to the lowest index.
std::size_t brute_force_argmin(std::span<const ShiftedParabola> family, double y);
std::size_t brute_force_argmin(std::span<const ShiftedPinball> family, double y);

}  // namespace ces
