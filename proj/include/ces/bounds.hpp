#pragma once

namespace ces {

/// Inputs for the coverage lower bounds of greedy early stopping reusing the
/// hold-out set: T candidate models, n hold-out points, level alpha, Markov
/// free parameter b > 1, and the constant c_T in the worst-case bound.
struct BoundInputs {
  int T = 1;
  int n = 1;
  double alpha = 0.1;
  double b = 100.0;
  double c_T = 1.0 / 3.0;

  void validate() const;
};

enum class BoundKind { dkw, markov, hybrid, markov_asymptotic };

struct BoundResult {
  BoundKind kind;
  double value = 0.0;   // coverage lower bound; <= 0 means vacuous
  bool vacuous = false; // true when the bound does not apply (e.g. floor(alpha(n+1)) = 0)
};

/// (1 + 1/n)(1 - alpha) - (sqrt(log(2T)/2) + c_T) / sqrt(n).
BoundResult dkw_bound(const BoundInputs& in);

/// I^{-1}(1/(bT); n+1-l, l) * (1 - 1/b) with l = floor(alpha (n+1)).
/// Vacuous when l = 0.
BoundResult markov_bound(const BoundInputs& in);

/// Large-T closed form:
/// [(1-alpha) - sqrt(alpha(1-alpha)/(n+1)) * sqrt(2 log(bT))] * (1 - 1/b).
BoundResult markov_asymptotic(const BoundInputs& in);

/// max(markov, dkw); equals the non-vacuous one when the other is vacuous.
BoundResult hybrid_bound(const BoundInputs& in);

/// Largest working level alpha' in (0, target_alpha] such that
/// hybrid(T, n, alpha') >= 1 - target_alpha, found by bisection to 1e-6.
/// Returns 0 when no such level exists (bound vacuous at this scale).
double corrected_level(double target_alpha, const BoundInputs& in);

// Special functions. The beta CDF uses a Lentz-style continued fraction with
// the symmetry switch at x > (a+1)/(a+b+2); the inverse is monotone
// bisection.
double regularized_incomplete_beta(double x, double a, double b);
double inverse_incomplete_beta(double p, double a, double b);

double normal_cdf(double x);
/// Inverse standard normal CDF; |Phi(Phi^{-1}(p)) - p| <= 1e-9 on (0,1).
double normal_quantile(double p);

}  // namespace ces
