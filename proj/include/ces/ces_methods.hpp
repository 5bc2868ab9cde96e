#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ces/conformal.hpp"
#include "ces/envelope.hpp"
#include "ces/matrix.hpp"
#include "ces/train.hpp"

namespace ces {

/// The shared early-stopping/calibration hold-out set, with per-model
/// evaluations cached once so that model selection per test point is cheap.
///
/// `model_outputs[t]` holds, per hold-out row, the quantity the procedures
/// consume: the prediction (regression), both head predictions
/// (quantile pair), softmax probabilities (classification / outlier
/// classifier), or the squared reconstruction error (one-class squared
/// error). `loss_total[t]` is the additive hold-out loss of model t;
/// quantile pairs also cache the per-head sums.
struct EsCalSet {
  Matrix X;
  std::vector<double> y;  // empty in reconstruction mode
  std::vector<Matrix> model_outputs;
  std::vector<double> loss_total;
  std::vector<double> loss_low;
  std::vector<double> loss_high;
  std::vector<std::vector<std::size_t>> class_rows;  // rows per label (classification)
  std::vector<double> u_cal;                         // APS uniform draws per row
  int classes = 0;

  std::size_t size() const { return X.rows; }
};

EsCalSet make_escal_set(const CheckpointStore& store, Matrix X, std::vector<double> y,
                        std::uint64_t u_seed = 0);

/// Evaluates every model of the store at one feature vector; row t carries
/// the same semantics as EsCalSet::model_outputs[t].
Matrix eval_models_at(const CheckpointStore& store, std::span<const double> x);

/// Real prediction interval with extended endpoints. `fallback_used` marks
/// intervals replaced by the greedy-selection fallback.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = false;
  bool fallback_used = false;

  double width() const { return empty ? 0.0 : hi - lo; }
  bool contains(double v) const { return !empty && lo <= v && v <= hi; }
};

enum class ClassificationMode { label_conditional, marginal };

struct LabelSetResult {
  std::vector<int> labels;             // included labels, ascending
  std::vector<double> pvalues;         // one per class
  std::vector<std::size_t> selected;   // chosen model per class
  std::vector<bool> absent_class;      // label-conditional classes with no hold-out rows
};

/// Conformal p-value for "the test point is an inlier". The model is chosen
/// by the augmented hold-out loss including the test point; scores are
/// oriented small = atypical (inlier-class probability, or the negated
/// reconstruction error).
double ces_outlier_pvalue(const CheckpointStore& store, const EsCalSet& escal,
                          std::span<const double> z, std::uint64_t noise_seed = 0,
                          double noise_scale = 0.0);

/// Prediction set over class labels. For each candidate label the model is
/// selected by the augmented hold-out loss under that label; adaptive scores
/// are compared within the label's own hold-out rows (label-conditional) or
/// all rows (marginal). A label is included iff its p-value >= alpha.
LabelSetResult ces_classification_set(const CheckpointStore& store, const EsCalSet& escal,
                                      std::span<const double> x, double alpha,
                                      ClassificationMode mode, std::uint64_t u_seed = 0);

/// Absolute-residual interval: lower envelope of the per-model augmented
/// losses over the placeholder outcome partitions the real line; each
/// segment is calibrated with its own selected model and the convex hull of
/// the surviving pieces is returned. May be empty.
Interval ces_regression_interval(const CheckpointStore& store, const EsCalSet& escal,
                                 std::span<const double> x, double alpha);

/// As above, but an empty result is replaced by the greedy-selection
/// interval and flagged.
Interval ces_regression_interval_nonempty(const CheckpointStore& store, const EsCalSet& escal,
                                          std::span<const double> x, double alpha);

/// Quantile-pair interval: one pinball envelope per target level, knots
/// merged, each merged segment calibrated with its selected model pair.
Interval ces_cqr_interval(const CheckpointStore& store, const EsCalSet& escal,
                          std::span<const double> x, double alpha);

Interval ces_cqr_interval_nonempty(const CheckpointStore& store, const EsCalSet& escal,
                                   std::span<const double> x, double alpha);

/// Fallback composition used by the nonempty variants.
Interval substitute_if_empty(const Interval& primary, const Interval& fallback);

}  // namespace ces
