#include "ces/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace ces {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double curve_value(const ShiftedParabola& p, double y) {
  const double d = y - p.mu;
  return p.c + d * d;
}

double curve_value(const ShiftedPinball& p, double y) {
  const double d = y - p.yhat;
  return p.c + (d > 0.0 ? p.beta * d : (1.0 - p.beta) * (-d));
}

std::size_t StepFunction::segment_at(double y) const {
  // segment l covers (knots[l-1], knots[l]]
  return static_cast<std::size_t>(std::lower_bound(knots.begin(), knots.end(), y) - knots.begin());
}

namespace {

// A representative point for comparing two curves on an unbounded interval.
double reference_point(const ShiftedParabola& p) { return p.mu; }
double reference_point(const ShiftedPinball& p) { return p.yhat; }

// Unique transversal intersection of two family members, if any.
std::optional<double> crossing(const ShiftedParabola& a, const ShiftedParabola& b) {
  if (a.mu == b.mu) return std::nullopt;  // difference is constant
  return (b.c - a.c + b.mu * b.mu - a.mu * a.mu) / (2.0 * (b.mu - a.mu));
}

std::optional<double> crossing(const ShiftedPinball& a, const ShiftedPinball& b) {
  const ShiftedPinball& lo = a.yhat <= b.yhat ? a : b;
  const ShiftedPinball& hi = a.yhat <= b.yhat ? b : a;
  if (lo.yhat == hi.yhat) return std::nullopt;  // parallel; difference constant in each tail
  // d(y) = hi(y) - lo(y) is constant on each tail and decreases with slope -1
  // between the kinks, so there is at most one sign change.
  const double beta = a.beta;
  const double d_left = hi.c - lo.c + (1.0 - beta) * (hi.yhat - lo.yhat);
  const double d_right = hi.c - lo.c - beta * (hi.yhat - lo.yhat);
  if (d_left > 0.0 && d_right < 0.0) return lo.yhat + d_left;
  return std::nullopt;
}

// One segment of a partial envelope: curve `curve` wins up to `hi`.
struct Piece {
  double hi;
  std::size_t curve;  // position within the family array
};

template <typename Curve>
std::size_t lower_at(std::span<const Curve> fam, std::size_t i, std::size_t j, double y) {
  const double vi = curve_value(fam[i], y);
  const double vj = curve_value(fam[j], y);
  if (vi < vj) return i;
  if (vj < vi) return j;
  return fam[i].index <= fam[j].index ? i : j;  // tie: lowest model index
}

template <typename Curve>
double sample_point(std::span<const Curve> fam, std::size_t i, std::size_t j, double lo, double hi) {
  if (std::isinf(lo) && std::isinf(hi)) {
    return 0.5 * (reference_point(fam[i]) + reference_point(fam[j]));
  }
  if (std::isinf(lo)) return hi - 1.0;
  if (std::isinf(hi)) return lo + 1.0;
  return 0.5 * (lo + hi);
}

template <typename Curve>
void emit(std::vector<Piece>& out, double hi, std::size_t curve) {
  if (!out.empty() && out.back().curve == curve) {
    out.back().hi = hi;  // extend
  } else {
    out.push_back({hi, curve});
  }
}

// Merge two envelopes over disjoint sub-families. Within each interval of the
// refined partition exactly one curve of each side is active and the pair
// crosses at most once.
template <typename Curve>
std::vector<Piece> merge_envelopes(std::span<const Curve> fam, const std::vector<Piece>& A,
                                   const std::vector<Piece>& B) {
  std::vector<Piece> out;
  out.reserve(A.size() + B.size());
  std::size_t ia = 0, ib = 0;
  double lo = -kInf;
  while (ia < A.size() && ib < B.size()) {
    const double hi = std::min(A[ia].hi, B[ib].hi);
    const std::size_t ca = A[ia].curve;
    const std::size_t cb = B[ib].curve;
    if (lo < hi) {  // skip empty slivers produced by equal boundaries
      const auto cross = crossing(fam[ca], fam[cb]);
      if (cross && lo < *cross && *cross < hi) {
        const std::size_t left = lower_at(fam, ca, cb, sample_point(fam, ca, cb, lo, *cross));
        const std::size_t right = left == ca ? cb : ca;
        emit<Curve>(out, *cross, left);
        emit<Curve>(out, hi, right);
      } else {
        emit<Curve>(out, hi, lower_at(fam, ca, cb, sample_point(fam, ca, cb, lo, hi)));
      }
    }
    lo = hi;
    if (A[ia].hi == hi) ++ia;
    if (B[ib].hi == hi) ++ib;
  }
  if (!out.empty()) out.back().hi = kInf;
  return out;
}

template <typename Curve>
std::vector<Piece> envelope_rec(std::span<const Curve> fam, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return {{kInf, lo}};
  const std::size_t mid = lo + (hi - lo) / 2;
  return merge_envelopes(fam, envelope_rec(fam, lo, mid), envelope_rec(fam, mid, hi));
}

template <typename Curve>
StepFunction lower_envelope(std::span<const Curve> fam) {
  if (fam.empty()) throw std::invalid_argument("lower_envelope: empty family");
  const auto pieces = envelope_rec(fam, 0, fam.size());
  StepFunction sf;
  sf.segment_indices.reserve(pieces.size());
  sf.knots.reserve(pieces.size() - 1);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::size_t idx = fam[pieces[i].curve].index;
    // duplicate curves can win adjacent pieces under the same model index
    if (!sf.segment_indices.empty() && sf.segment_indices.back() == idx) {
      sf.knots.back() = pieces[i].hi;
      if (i + 1 == pieces.size()) sf.knots.pop_back();
      continue;
    }
    sf.segment_indices.push_back(idx);
    if (i + 1 < pieces.size()) sf.knots.push_back(pieces[i].hi);
  }
  return sf;
}

}  // namespace

StepFunction parabola_lower_envelope(std::span<const ShiftedParabola> family) {
  return lower_envelope(family);
}

StepFunction pinball_lower_envelope(std::span<const ShiftedPinball> family) {
  if (!family.empty()) {
    const double beta = family.front().beta;
    for (const auto& p : family) {
      if (p.beta != beta) throw std::invalid_argument("pinball_lower_envelope: mismatched beta");
    }
  }
  return lower_envelope(family);
}

MergedPartition concat_and_sort_knots(const StepFunction& low, const StepFunction& high) {
  MergedPartition out;
  out.knots.reserve(low.knots.size() + high.knots.size());
  out.segment_pairs.reserve(low.knots.size() + high.knots.size() + 1);
  std::size_t il = 0, ih = 0;
  while (true) {
    out.segment_pairs.emplace_back(low.segment_indices[il], high.segment_indices[ih]);
    const double next_low = il < low.knots.size() ? low.knots[il] : kInf;
    const double next_high = ih < high.knots.size() ? high.knots[ih] : kInf;
    if (std::isinf(next_low) && std::isinf(next_high)) break;
    // duplicates are kept: advance one list at a time
    if (next_low <= next_high) {
      out.knots.push_back(next_low);
      ++il;
    } else {
      out.knots.push_back(next_high);
      ++ih;
    }
  }
  return out;
}

namespace {

template <typename Curve>
std::size_t brute_force(std::span<const Curve> family, double y) {
  if (family.empty()) throw std::invalid_argument("brute_force_argmin: empty family");
  std::size_t best = 0;
  double best_v = curve_value(family[0], y);
  for (std::size_t i = 1; i < family.size(); ++i) {
    const double v = curve_value(family[i], y);
    if (v < best_v || (v == best_v && family[i].index < family[best].index)) {
      best = i;
      best_v = v;
    }
  }
  return family[best].index;
}

}  // namespace

std::size_t brute_force_argmin(std::span<const ShiftedParabola> family, double y) {
  return brute_force(family, y);
}

std::size_t brute_force_argmin(std::span<const ShiftedPinball> family, double y) {
  return brute_force(family, y);
}

}  // namespace ces
