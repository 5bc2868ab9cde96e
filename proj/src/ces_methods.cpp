#include "ces/ces_methods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "ces/naive.hpp"
#include "ces/network.hpp"
#include "ces/rng.hpp"
#include "methods_detail.hpp"

namespace ces {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool reconstruction_mode(const CheckpointStore& store, const std::vector<double>& y) {
  return store.loss.type == LossKind::Type::squared_error && y.empty();
}

// Evaluates one model on one feature vector into the cached-output
// semantics; also returns the per-sample loss for cache building.
void eval_one(const CheckpointStore& store, const Checkpoint& ckpt, std::span<const double> x,
              std::span<const double> target, bool recon, Workspace& ws, double* out_row,
              double& loss_value, double* loss_low, double* loss_high) {
  const auto& loss = store.loss;
  auto raw = forward_into(ckpt.spec, ckpt.weights, x, ws);
  switch (loss.type) {
    case LossKind::Type::squared_error: {
      if (recon) {
        const double err = sample_loss(loss, raw, x);
        loss_value = err;
        out_row[0] = err;
      } else {
        loss_value = sample_loss(loss, raw, target);
        out_row[0] = raw[0];
      }
      return;
    }
    case LossKind::Type::cross_entropy: {
      loss_value = sample_loss(loss, raw, target);
      auto probs = softmax(raw);
      std::copy(probs.begin(), probs.end(), out_row);
      return;
    }
    case LossKind::Type::pinball: {
      loss_value = sample_loss(loss, raw, target);
      out_row[0] = raw[0];
      return;
    }
    case LossKind::Type::pinball_pair: {
      const double lo = pinball_loss(loss.beta_low, target[0], raw[0]);
      const double hi = pinball_loss(loss.beta_high, target[0], raw[1]);
      loss_value = lo + hi;
      if (loss_low) *loss_low += lo;
      if (loss_high) *loss_high += hi;
      out_row[0] = raw[0];
      out_row[1] = raw[1];
      return;
    }
  }
}

std::size_t output_width(const CheckpointStore& store, bool recon) {
  switch (store.loss.type) {
    case LossKind::Type::squared_error:
      return recon ? 1 : 1;
    case LossKind::Type::cross_entropy:
      return static_cast<std::size_t>(store.loss.classes);
    case LossKind::Type::pinball:
      return 1;
    case LossKind::Type::pinball_pair:
      return 2;
  }
  return 1;
}

}  // namespace

EsCalSet make_escal_set(const CheckpointStore& store, Matrix X, std::vector<double> y,
                        std::uint64_t u_seed) {
  if (store.checkpoints.empty()) throw std::invalid_argument("make_escal_set: empty store");
  if (X.rows == 0) throw std::invalid_argument("make_escal_set: empty hold-out set");
  if (X.cols != store.spec().input_size()) {
    throw std::invalid_argument("make_escal_set: feature dimension mismatch");
  }
  const bool recon = reconstruction_mode(store, y);
  if (!recon && y.size() != X.rows) {
    throw std::invalid_argument("make_escal_set: target count mismatch");
  }

  EsCalSet s;
  s.X = std::move(X);
  s.y = std::move(y);
  const std::size_t T = store.size();
  const std::size_t n = s.X.rows;
  const std::size_t width = output_width(store, recon);
  const bool pair = store.loss.type == LossKind::Type::pinball_pair;

  s.model_outputs.assign(T, Matrix(n, width));
  s.loss_total.assign(T, 0.0);
  if (pair) {
    s.loss_low.assign(T, 0.0);
    s.loss_high.assign(T, 0.0);
  }

  Workspace ws;
  ws.resize(store.spec());
  for (std::size_t t = 0; t < T; ++t) {
    double* lo = pair ? &s.loss_low[t] : nullptr;
    double* hi = pair ? &s.loss_high[t] : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      double li = 0.0;
      const std::span<const double> target =
          recon ? s.X.row_span(i) : std::span<const double>{s.y.data() + i, 1};
      eval_one(store, store.checkpoints[t], s.X.row_span(i), target, recon, ws,
               s.model_outputs[t].row(i), li, lo, hi);
      if (!std::isfinite(li)) {
        throw std::runtime_error("make_escal_set: non-finite hold-out loss");
      }
      s.loss_total[t] += li;
    }
  }

  if (store.loss.type == LossKind::Type::cross_entropy) {
    s.classes = store.loss.classes;
    s.class_rows.assign(s.classes, {});
    for (std::size_t i = 0; i < n; ++i) {
      const int label = static_cast<int>(s.y[i]);
      if (label < 0 || label >= s.classes) {
        throw std::invalid_argument("make_escal_set: label out of range");
      }
      s.class_rows[label].push_back(i);
    }
    s.u_cal.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.u_cal[i] = Rng(derive_seed(u_seed, 0xa95, i)).uniform01();
    }
  }
  return s;
}

Matrix eval_models_at(const CheckpointStore& store, std::span<const double> x) {
  if (store.checkpoints.empty()) throw std::invalid_argument("eval_models_at: empty store");
  if (x.size() != store.spec().input_size()) {
    throw std::invalid_argument("eval_models_at: feature dimension mismatch");
  }
  const bool recon = reconstruction_mode(store, {});
  const std::size_t width = output_width(store, recon);
  Matrix out(store.size(), width);
  Workspace ws;
  ws.resize(store.spec());
  for (std::size_t t = 0; t < store.size(); ++t) {
    const Checkpoint& ckpt = store.checkpoints[t];
    auto raw = forward_into(ckpt.spec, ckpt.weights, x, ws);
    switch (store.loss.type) {
      case LossKind::Type::squared_error:
        if (recon) {
          out.at(t, 0) = sample_loss(store.loss, raw, x);
        } else {
          out.at(t, 0) = raw[0];
        }
        break;
      case LossKind::Type::cross_entropy: {
        auto probs = softmax(raw);
        std::copy(probs.begin(), probs.end(), out.row(t));
        break;
      }
      case LossKind::Type::pinball:
        out.at(t, 0) = raw[0];
        break;
      case LossKind::Type::pinball_pair:
        out.at(t, 0) = raw[0];
        out.at(t, 1) = raw[1];
        break;
    }
  }
  return out;
}

namespace detail {

std::size_t argmin_index(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

std::vector<double> sorted_abs_residuals(const EsCalSet& escal, std::size_t t) {
  std::vector<double> r(escal.size());
  const Matrix& out = escal.model_outputs[t];
  for (std::size_t i = 0; i < escal.size(); ++i) {
    r[i] = std::abs(escal.y[i] - out.at(i, 0));
  }
  std::sort(r.begin(), r.end());
  return r;
}

std::vector<double> sorted_band_scores(const EsCalSet& escal, std::size_t t_low,
                                       std::size_t t_high) {
  std::vector<double> r(escal.size());
  const Matrix& lo = escal.model_outputs[t_low];
  const Matrix& hi = escal.model_outputs[t_high];
  for (std::size_t i = 0; i < escal.size(); ++i) {
    r[i] = std::max(lo.at(i, 0) - escal.y[i], escal.y[i] - hi.at(i, 1));
  }
  std::sort(r.begin(), r.end());
  return r;
}

double quantile_sorted(const std::vector<double>& sorted, double alpha) {
  const std::size_t n = sorted.size();
  const auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n + 1)));
  if (k > n) return kInf;
  return sorted[k - 1];
}

double class_pvalue(const EsCalSet& escal, std::size_t t, std::span<const std::size_t> rows,
                    std::span<const double> test_probs, int y, double u_test) {
  ScoreSet s;
  s.cal_scores.reserve(rows.size());
  const Matrix& probs = escal.model_outputs[t];
  for (std::size_t i : rows) {
    const int own_label = static_cast<int>(escal.y[i]);
    s.cal_scores.push_back(-aps_score({probs.row_span(i), own_label, escal.u_cal[i]}));
  }
  s.test_score = -aps_score({test_probs, y, u_test});
  return conformal_pvalue(s);
}

std::vector<double> test_selection_losses(const CheckpointStore& store, const Matrix& test_eval,
                                          int label) {
  std::vector<double> losses(test_eval.rows);
  switch (store.loss.type) {
    case LossKind::Type::squared_error:  // reconstruction error is the loss
      for (std::size_t t = 0; t < test_eval.rows; ++t) losses[t] = test_eval.at(t, 0);
      break;
    case LossKind::Type::cross_entropy:
      for (std::size_t t = 0; t < test_eval.rows; ++t) {
        losses[t] = -std::log(test_eval.at(t, static_cast<std::size_t>(label)));
      }
      break;
    default:
      throw std::invalid_argument("test_selection_losses: unsupported loss kind");
  }
  return losses;
}

Interval hull_over_segments(const std::vector<double>& knots,
                            const std::vector<std::pair<double, double>>& segment_intervals) {
  double lo = kInf, hi = -kInf;
  bool any = false;
  for (std::size_t l = 0; l < segment_intervals.size(); ++l) {
    const double a = l == 0 ? -kInf : knots[l - 1];
    const double b = l == knots.size() ? kInf : knots[l];
    const auto [c_lo, c_hi] = segment_intervals[l];
    if (c_lo > c_hi) continue;  // empty candidate
    // intersection of (a, b] with [c_lo, c_hi]
    const double u = std::min(b, c_hi);
    if (!(u > a && u >= c_lo)) continue;
    any = true;
    lo = std::min(lo, std::max(a, c_lo));
    hi = std::max(hi, u);
  }
  Interval out;
  if (!any) {
    out.empty = true;
    return out;
  }
  out.lo = lo;
  out.hi = hi;
  return out;
}

}  // namespace detail

double ces_outlier_pvalue(const CheckpointStore& store, const EsCalSet& escal,
                          std::span<const double> z, std::uint64_t noise_seed,
                          double noise_scale) {
  const bool classifier = store.loss.type == LossKind::Type::cross_entropy;
  if (!classifier && !(store.loss.type == LossKind::Type::squared_error && escal.y.empty())) {
    throw std::invalid_argument(
        "ces_outlier_pvalue: store must be a classifier (inlier class 0) or a reconstruction model");
  }
  const Matrix test_eval = eval_models_at(store, z);
  const auto test_losses = detail::test_selection_losses(store, test_eval, 0);

  std::vector<double> objective(store.size());
  for (std::size_t t = 0; t < store.size(); ++t) {
    objective[t] = escal.loss_total[t] + test_losses[t];
  }
  const std::size_t best = detail::argmin_index(objective);

  // small score = more atypical
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

LabelSetResult ces_classification_set(const CheckpointStore& store, const EsCalSet& escal,
                                      std::span<const double> x, double alpha,
                                      ClassificationMode mode, std::uint64_t u_seed) {
  if (store.loss.type != LossKind::Type::cross_entropy) {
    throw std::invalid_argument("ces_classification_set: cross-entropy store required");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("ces_classification_set: alpha in (0,1)");
  }
  const int K = store.loss.classes;
  const Matrix test_eval = eval_models_at(store, x);

  std::vector<std::size_t> all_rows(escal.size());
  for (std::size_t i = 0; i < escal.size(); ++i) all_rows[i] = i;

  LabelSetResult res;
  res.pvalues.resize(K);
  res.selected.resize(K);
  res.absent_class.assign(K, false);
  for (int y = 0; y < K; ++y) {
    const auto test_losses = detail::test_selection_losses(store, test_eval, y);
    std::vector<double> objective(store.size());
    for (std::size_t t = 0; t < store.size(); ++t) {
      objective[t] = escal.loss_total[t] + test_losses[t];
    }
    const std::size_t best = detail::argmin_index(objective);
    res.selected[y] = best;

    const double u_test = Rng(derive_seed(u_seed, 0x7e57, static_cast<std::uint64_t>(y))).uniform01();
    double pv;
    if (mode == ClassificationMode::label_conditional) {
      const auto& rows = escal.class_rows[y];
      if (rows.empty()) {
        // no hold-out examples of this class: include by convention
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

Interval ces_regression_interval(const CheckpointStore& store, const EsCalSet& escal,
                                 std::span<const double> x, double alpha) {
  if (store.loss.type != LossKind::Type::squared_error || escal.y.empty()) {
    throw std::invalid_argument("ces_regression_interval: squared-error store required");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("ces_regression_interval: alpha in (0,1)");
  }
  const Matrix test_eval = eval_models_at(store, x);
  std::vector<ShiftedParabola> family(store.size());
  for (std::size_t t = 0; t < store.size(); ++t) {
    family[t] = {t, escal.loss_total[t], test_eval.at(t, 0)};
  }
  const StepFunction env = parabola_lower_envelope(family);

  std::map<std::size_t, std::vector<double>> residual_cache;
  std::vector<std::pair<double, double>> segment_intervals(env.segment_count());
  for (std::size_t l = 0; l < env.segment_count(); ++l) {
    const std::size_t m = env.segment_indices[l];
    auto it = residual_cache.find(m);
    if (it == residual_cache.end()) {
      it = residual_cache.emplace(m, detail::sorted_abs_residuals(escal, m)).first;
    }
    const double q = detail::quantile_sorted(it->second, alpha);
    const double center = test_eval.at(m, 0);
    segment_intervals[l] = {center - q, center + q};
  }
  return detail::hull_over_segments(env.knots, segment_intervals);
}

Interval ces_regression_interval_nonempty(const CheckpointStore& store, const EsCalSet& escal,
                                          std::span<const double> x, double alpha) {
  const Interval plain = ces_regression_interval(store, escal, x, alpha);
  if (!plain.empty) return plain;
  return substitute_if_empty(plain, naive_regression_interval(store, escal, x, alpha));
}

Interval ces_cqr_interval(const CheckpointStore& store, const EsCalSet& escal,
                          std::span<const double> x, double alpha) {
  if (store.loss.type != LossKind::Type::pinball_pair) {
    throw std::invalid_argument("ces_cqr_interval: pinball_pair store required");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("ces_cqr_interval: alpha in (0,1)");
  }
  const Matrix test_eval = eval_models_at(store, x);
  const std::size_t T = store.size();
  std::vector<ShiftedPinball> fam_low(T), fam_high(T);
  for (std::size_t t = 0; t < T; ++t) {
    fam_low[t] = {t, escal.loss_low[t], test_eval.at(t, 0), store.loss.beta_low};
    fam_high[t] = {t, escal.loss_high[t], test_eval.at(t, 1), store.loss.beta_high};
  }
  const StepFunction env_low = pinball_lower_envelope(fam_low);
  const StepFunction env_high = pinball_lower_envelope(fam_high);
  const MergedPartition part = concat_and_sort_knots(env_low, env_high);

  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> score_cache;
  std::vector<std::pair<double, double>> segment_intervals(part.segment_pairs.size());
  for (std::size_t l = 0; l < part.segment_pairs.size(); ++l) {
    const auto [ml, mh] = part.segment_pairs[l];
    auto it = score_cache.find({ml, mh});
    if (it == score_cache.end()) {
      it = score_cache.emplace(std::make_pair(ml, mh), detail::sorted_band_scores(escal, ml, mh))
               .first;
    }
    const double q = detail::quantile_sorted(it->second, alpha);
    segment_intervals[l] = {test_eval.at(ml, 0) - q, test_eval.at(mh, 1) + q};
  }
  return detail::hull_over_segments(part.knots, segment_intervals);
}

Interval ces_cqr_interval_nonempty(const CheckpointStore& store, const EsCalSet& escal,
                                   std::span<const double> x, double alpha) {
  const Interval plain = ces_cqr_interval(store, escal, x, alpha);
  if (!plain.empty) return plain;
  return substitute_if_empty(plain, naive_cqr_interval(store, escal, x, alpha));
}

Interval substitute_if_empty(const Interval& primary, const Interval& fallback) {
  if (!primary.empty) return primary;
  Interval out = fallback;
  out.fallback_used = true;
  return out;
}

}  // namespace ces
