#pragma once

// Shared internals of the per-test-point selection procedures and their
// greedy counterparts.

#include <cstdint>
#include <span>
#include <vector>

#include "ces/ces_methods.hpp"

namespace ces::detail {

// Hold-out absolute residuals |y_i - mu_t(X_i)| of one model, sorted.
std::vector<double> sorted_abs_residuals(const EsCalSet& escal, std::size_t t);

// Hold-out quantile-band scores max(q_lo - y, y - q_hi), heads taken from
// (possibly different) models t_low and t_high, sorted.
std::vector<double> sorted_band_scores(const EsCalSet& escal, std::size_t t_low,
                                       std::size_t t_high);

// ceil((1-alpha)(n+1))-th smallest of pre-sorted scores, +inf past the end.
double quantile_sorted(const std::vector<double>& sorted, double alpha);

// p-value for label y computed with model t's cached probabilities.
// rows picks the comparison set; test_probs is that model's softmax at the
// test point. APS scores grow with misfit, so the rank is taken on negated
// scores to keep the "small = atypical" orientation of conformal_pvalue.
double class_pvalue(const EsCalSet& escal, std::size_t t, std::span<const std::size_t> rows,
                    std::span<const double> test_probs, int y, double u_test);

// Selection losses of the test point under every model: the per-model loss
// contribution l(M_t; z) used in the augmented objective. For classification
// the label enters via `label`.
std::vector<double> test_selection_losses(const CheckpointStore& store, const Matrix& test_eval,
                                          int label);

// argmin with ties to the earliest epoch (lowest index)
std::size_t argmin_index(std::span<const double> v);

Interval hull_over_segments(const std::vector<double>& knots,
                            const std::vector<std::pair<double, double>>& segment_intervals);

}  // namespace ces::detail
