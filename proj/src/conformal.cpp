#include "ces/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ces/rng.hpp"

namespace ces {

double conformal_pvalue(const ScoreSet& s) {
  if (s.cal_scores.empty()) throw std::invalid_argument("conformal_pvalue: no calibration scores");
  std::size_t count = 0;
  for (double v : s.cal_scores) {
    if (v <= s.test_score) ++count;
  }
  return static_cast<double>(1 + count) / static_cast<double>(1 + s.cal_scores.size());
}

double conformal_quantile(std::span<const double> cal_scores, double alpha) {
  if (cal_scores.empty()) throw std::invalid_argument("conformal_quantile: no scores");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("conformal_quantile: alpha in (0,1)");
  const std::size_t n = cal_scores.size();
  const auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n + 1)));
  if (k > n) return std::numeric_limits<double>::infinity();
  std::vector<double> sorted(cal_scores.begin(), cal_scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  return sorted[k - 1];
}

double aps_score(const APSInput& in) {
  const std::size_t k = in.probs.size();
  if (k == 0) throw std::invalid_argument("aps_score: empty probability vector");
  if (in.label < 0 || static_cast<std::size_t>(in.label) >= k) {
    throw std::invalid_argument("aps_score: label out of range");
  }
  double sum = 0.0;
  for (double p : in.probs) {
    if (p < 0.0) throw std::invalid_argument("aps_score: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("aps_score: probabilities must sum to 1");

  // descending rank of the label; ties resolved by class index for determinism
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return in.probs[a] > in.probs[b]; });
  double cum = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    cum += in.probs[order[r]];
    if (order[r] == static_cast<std::size_t>(in.label)) {
      return cum - in.u * in.probs[order[r]];
    }
  }
  return cum;  // unreachable
}

ScoreSet add_tiebreak_noise(std::span<const double> cal_scores, double test_score,
                            std::uint64_t seed, std::optional<double> scale) {
  ScoreSet out;
  out.cal_scores.assign(cal_scores.begin(), cal_scores.end());
  out.test_score = test_score;
  out.noise_seed = seed;

  double s;
  if (scale.has_value()) {
    if (*scale < 0.0) throw std::invalid_argument("add_tiebreak_noise: scale must be >= 0");
    s = *scale;
  } else {
    double lo = test_score, hi = test_score;
    for (double v : cal_scores) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s = 1e-9 * (hi - lo + 1.0);
  }
  if (s == 0.0) return out;

  Rng rng(derive_seed(seed, 0x71e5));
  for (double& v : out.cal_scores) v += rng.uniform(0.0, s);
  out.test_score += rng.uniform(0.0, s);
  return out;
}

}  // namespace ces
