#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "ces/ces_methods.hpp"

namespace ces {

// Greedy early-stopping baselines: one model is picked by the plain hold-out
// loss, without the test point, and the same hold-out set is then reused for
// standard split-conformal calibration. Not valid at the nominal level on
// its own; pair with corrected_level() for guaranteed coverage.

/// argmin_t of the cached hold-out loss; ties to the earliest epoch.
std::size_t greedy_model_index(const EsCalSet& escal);

/// Per-head argmins for a quantile-pair store.
std::pair<std::size_t, std::size_t> greedy_model_indices_cqr(const EsCalSet& escal);

double naive_outlier_pvalue(const CheckpointStore& store, const EsCalSet& escal,
                            std::span<const double> z, std::uint64_t noise_seed = 0,
                            double noise_scale = 0.0);

LabelSetResult naive_classification_set(const CheckpointStore& store, const EsCalSet& escal,
                                        std::span<const double> x, double alpha,
                                        ClassificationMode mode, std::uint64_t u_seed = 0);

Interval naive_regression_interval(const CheckpointStore& store, const EsCalSet& escal,
                                   std::span<const double> x, double alpha);

Interval naive_cqr_interval(const CheckpointStore& store, const EsCalSet& escal,
                            std::span<const double> x, double alpha);

}  // namespace ces
