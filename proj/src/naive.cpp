#include "ces/naive.hpp"

#include <stdexcept>

#include "ces/rng.hpp"
#include "methods_detail.hpp"

namespace ces {

std::size_t greedy_model_index(const EsCalSet& escal) {
  if (escal.loss_total.empty()) throw std::invalid_argument("greedy_model_index: no cached losses");
  return detail::argmin_index(escal.loss_total);
}

std::pair<std::size_t, std::size_t> greedy_model_indices_cqr(const EsCalSet& escal) {
  if (escal.loss_low.empty()) {
    throw std::invalid_argument("greedy_model_indices_cqr: per-head losses not cached");
  }
  return {detail::argmin_index(escal.loss_low), detail::argmin_index(escal.loss_high)};
}

double naive_outlier_pvalue(const CheckpointStore& store, const EsCalSet& escal,
                            std::span<const double> z, std::uint64_t noise_seed,
                            double noise_scale) {
  const bool classifier = store.loss.type == LossKind::Type::cross_entropy;
  if (!classifier && !(store.loss.type == LossKind::Type::squared_error && escal.y.empty())) {
    throw std::invalid_argument("naive_outlier_pvalue: classifier or reconstruction store required");
  }
  const std::size_t best = greedy_model_index(escal);
  const Matrix test_eval = eval_models_at(store, z);

  std::vector<double> cal(escal.size());
  double test_score;
  if (classifier) {
    for (std::size_t i = 0; i < escal.size(); ++i) cal[i] = escal.model_outputs[best].at(i, 0);
    test_score = test_eval.at(best, 0);
  } else {
    for (std::size_t i = 0; i < escal.size(); ++i) cal[i] = -escal.model_outputs[best].at(i, 0);
    test_score = -test_eval.at(best, 0);
  }
  const ScoreSet scores = add_tiebreak_noise(cal, test_score, noise_seed, noise_scale);
  return conformal_pvalue(scores);
}

LabelSetResult naive_classification_set(const CheckpointStore& store, const EsCalSet& escal,
                                        std::span<const double> x, double alpha,
                                        ClassificationMode mode, std::uint64_t u_seed) {
  if (store.loss.type != LossKind::Type::cross_entropy) {
    throw std::invalid_argument("naive_classification_set: cross-entropy store required");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("naive_classification_set: alpha in (0,1)");
  }
  const int K = store.loss.classes;
  const std::size_t best = greedy_model_index(escal);
  const Matrix test_eval = eval_models_at(store, x);

  std::vector<std::size_t> all_rows(escal.size());
  for (std::size_t i = 0; i < escal.size(); ++i) all_rows[i] = i;

  LabelSetResult res;
  res.pvalues.resize(K);
  res.selected.assign(K, best);
  res.absent_class.assign(K, false);
  for (int y = 0; y < K; ++y) {
    const double u_test = Rng(derive_seed(u_seed, 0x7e57, static_cast<std::uint64_t>(y))).uniform01();
    double pv;
    if (mode == ClassificationMode::label_conditional) {
      const auto& rows = escal.class_rows[y];
      if (rows.empty()) {
        pv = 1.0;
        res.absent_class[y] = true;
      } else {
        pv = detail::class_pvalue(escal, best, rows, test_eval.row_span(best), y, u_test);
      }
    } else {
      pv = detail::class_pvalue(escal, best, all_rows, test_eval.row_span(best), y, u_test);
    }
    res.pvalues[y] = pv;
    if (pv >= alpha) res.labels.push_back(y);
  }
  return res;
}

Interval naive_regression_interval(const CheckpointStore& store, const EsCalSet& escal,
                                   std::span<const double> x, double alpha) {
  if (store.loss.type != LossKind::Type::squared_error || escal.y.empty()) {
    throw std::invalid_argument("naive_regression_interval: squared-error store required");
  }
  const std::size_t best = greedy_model_index(escal);
  const Matrix test_eval = eval_models_at(store, x);
  const auto sorted = detail::sorted_abs_residuals(escal, best);
  const double q = detail::quantile_sorted(sorted, alpha);
  const double center = test_eval.at(best, 0);
  return {center - q, center + q, false, false};
}

Interval naive_cqr_interval(const CheckpointStore& store, const EsCalSet& escal,
                            std::span<const double> x, double alpha) {
  if (store.loss.type != LossKind::Type::pinball_pair) {
    throw std::invalid_argument("naive_cqr_interval: pinball_pair store required");
  }
  const auto [t_low, t_high] = greedy_model_indices_cqr(escal);
  const Matrix test_eval = eval_models_at(store, x);
  const auto sorted = detail::sorted_band_scores(escal, t_low, t_high);
  const double q = detail::quantile_sorted(sorted, alpha);
  const double lo = test_eval.at(t_low, 0) - q;
  const double hi = test_eval.at(t_high, 1) + q;
  Interval out{lo, hi, false, false};
  if (lo > hi) {
    // crossed quantile estimates beyond the calibration margin
    out.empty = true;
  }
  return out;
}

}  // namespace ces
