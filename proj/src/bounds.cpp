#include "ces/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace ces {

void BoundInputs::validate() const {
  if (T < 1) throw std::invalid_argument("BoundInputs: T >= 1 required");
  if (n < 1) throw std::invalid_argument("BoundInputs: n >= 1 required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("BoundInputs: alpha in (0,1)");
  if (!(b > 1.0)) throw std::invalid_argument("BoundInputs: b > 1 required");
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to working precision in practice well before kMaxIter
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(x, a, b) / a;
  }
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double inverse_incomplete_beta(double p, double a, double b) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("inverse_incomplete_beta: p in [0,1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_incomplete_beta(mid, a, b) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-16) break;
  }
  return 0.5 * (lo + hi);
}

BoundResult dkw_bound(const BoundInputs& in) {
  in.validate();
  const double n = in.n;
  const double value = (1.0 + 1.0 / n) * (1.0 - in.alpha) -
                       (std::sqrt(std::log(2.0 * in.T) / 2.0) + in.c_T) / std::sqrt(n);
  return {BoundKind::dkw, value, false};
}

BoundResult markov_bound(const BoundInputs& in) {
  in.validate();
  const auto l = static_cast<long>(std::floor(in.alpha * (in.n + 1)));
  if (l < 1) return {BoundKind::markov, 0.0, true};
  const double q = inverse_incomplete_beta(1.0 / (in.b * in.T), in.n + 1.0 - l, static_cast<double>(l));
  return {BoundKind::markov, q * (1.0 - 1.0 / in.b), false};
}

BoundResult markov_asymptotic(const BoundInputs& in) {
  in.validate();
  const double n1 = in.n + 1.0;
  const double value = ((1.0 - in.alpha) -
                        std::sqrt(in.alpha * (1.0 - in.alpha) / n1) * std::sqrt(2.0 * std::log(in.b * in.T))) *
                       (1.0 - 1.0 / in.b);
  return {BoundKind::markov_asymptotic, value, false};
}

BoundResult hybrid_bound(const BoundInputs& in) {
  const BoundResult m = markov_bound(in);
  const BoundResult d = dkw_bound(in);
  if (m.vacuous) return {BoundKind::hybrid, d.value, false};
  return {BoundKind::hybrid, std::max(m.value, d.value), false};
}

double corrected_level(double target_alpha, const BoundInputs& in) {
  if (!(target_alpha > 0.0 && target_alpha < 1.0)) {
    throw std::invalid_argument("corrected_level: target alpha in (0,1)");
  }
  const double want = 1.0 - target_alpha;
  auto bound_at = [&](double alpha) {
    BoundInputs probe = in;
    probe.alpha = alpha;
    return hybrid_bound(probe).value;
  };
  // The hybrid bound is nonincreasing in the working level.
  if (bound_at(target_alpha) >= want) return target_alpha;
  double lo = 0.0, hi = target_alpha;  // treat level 0 as the vacuous sentinel
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0) break;
    if (bound_at(mid) >= want) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p in (0,1)");
  if (p == 0.5) return 0.0;
  const double q = p < 0.5 ? p : 1.0 - p;
  // Rational lower-tail approximation as the seed...
  const double t = std::sqrt(-2.0 * std::log(q));
  double x = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                     (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
  x = -x;  // lower tail
  // ...then Newton refinement against the erfc-based CDF.
  for (int it = 0; it < 3; ++it) {
    const double err = normal_cdf(x) - q;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
    x -= err / pdf;
  }
  return p < 0.5 ? x : -x;
}

}  // namespace ces
