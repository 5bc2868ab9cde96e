#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ces {

/// Calibration scores plus one test score. Scores are oriented so that a
/// SMALLER value means "more atypical": the p-value counts calibration
/// scores at or below the test score.
struct ScoreSet {
  std::vector<double> cal_scores;
  double test_score = 0.0;
  std::uint64_t noise_seed = 0;
};

/// (1 + #{i : cal_i <= test}) / (1 + n); values in {1/(n+1), ..., 1}.
double conformal_pvalue(const ScoreSet& s);

/// The ceil((1-alpha)(n+1))-th smallest calibration score, or +infinity when
/// that index exceeds n.
double conformal_quantile(std::span<const double> cal_scores, double alpha);

struct APSInput {
  std::span<const double> probs;  // probability vector over K classes
  int label = 0;
  double u = 0.0;  // uniform draw in [0,1]
};

/// Adaptive classification score: cumulative probability of the classes
/// ranked (descending) at or above the label, minus u times the label's own
/// probability. Lies in [0,1]; larger means the label fits worse.
double aps_score(const APSInput& in);

/// Adds i.i.d. uniform(0, scale) noise to every score (calibration and
/// test), breaking ties at random but deterministically per seed. If scale
/// is not given it defaults to 1e-9 * (max - min + 1); scale 0 is the
/// identity.
ScoreSet add_tiebreak_noise(std::span<const double> cal_scores, double test_score,
                            std::uint64_t seed, std::optional<double> scale = std::nullopt);

}  // namespace ces
