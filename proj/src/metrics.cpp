#include "ces/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ces/rng.hpp"

namespace ces {

const char* const kMetricsHeader =
    "method,sample_size,marginal_coverage,conditional_coverage,mean_size,tpr,fpr,trial_seed";

namespace {

std::string cell(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << kMetricsHeader << "\n";
  for (const MetricsRow& r : rows) {
    os << r.method << ',' << r.sample_size << ',' << cell(r.marginal_coverage) << ','
       << cell(r.conditional_coverage) << ',' << cell(r.mean_size) << ',' << cell(r.tpr) << ','
       << cell(r.fpr) << ',' << r.trial_seed << "\n";
  }
}

double wsc_coverage(const Matrix& X, const std::vector<std::uint8_t>& covered, double delta,
                    int n_directions, double split_fraction, std::uint64_t seed) {
  const std::size_t n = X.rows;
  if (covered.size() != n) throw std::invalid_argument("wsc_coverage: flag count mismatch");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("wsc_coverage: delta in (0,1)");
  if (n < 50) {
    throw std::invalid_argument("wsc_coverage: need at least 50 test points, got " +
                                std::to_string(n));
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw std::invalid_argument("wsc_coverage: split_fraction in (0,1)");
  }
  if (n_directions < 1) throw std::invalid_argument("wsc_coverage: need at least one direction");

  Rng rng(derive_seed(seed, 0x35c));
  const auto perm = rng.permutation(n);
  const std::size_t n_sel = std::max<std::size_t>(2, static_cast<std::size_t>(split_fraction * n));
  const std::span<const std::size_t> sel(perm.data(), n_sel);
  const std::span<const std::size_t> eval(perm.data() + n_sel, n - n_sel);

  const std::size_t d = X.cols;
  std::vector<double> v(d);
  std::vector<std::pair<double, std::uint8_t>> proj(sel.size());
  std::vector<double> cum(sel.size() + 1);

  double best_rate = 1.0;
  std::vector<double> best_v(d, 0.0);
  double best_a = 0.0, best_b = 0.0;
  bool found = false;

  const auto min_pts = static_cast<std::size_t>(std::ceil(delta * static_cast<double>(sel.size())));
  for (int dir = 0; dir < n_directions; ++dir) {
    double norm = 0.0;
    for (auto& vi : v) {
      vi = rng.gauss();
      norm += vi * vi;
    }
    norm = std::sqrt(norm);
    for (auto& vi : v) vi /= norm;

    for (std::size_t i = 0; i < sel.size(); ++i) {
      double p = 0.0;
      const double* row = X.row(sel[i]);
      for (std::size_t c = 0; c < d; ++c) p += v[c] * row[c];
      proj[i] = {p, covered[sel[i]]};
    }
    std::sort(proj.begin(), proj.end());
    cum[0] = 0.0;
    for (std::size_t i = 0; i < proj.size(); ++i) cum[i + 1] = cum[i] + proj[i].second;

    // worst window (i, j] with at least min_pts points
    for (std::size_t i = 0; i + min_pts <= proj.size(); ++i) {
      for (std::size_t j = i + min_pts; j <= proj.size(); ++j) {
        const double rate = (cum[j] - cum[i]) / static_cast<double>(j - i);
        if (rate < best_rate) {
          best_rate = rate;
          best_v = v;
          best_a = proj[i].first;
          best_b = proj[j - 1].first;
          found = true;
        }
      }
    }
  }

  if (!found) return 1.0;  // all slabs fully covered on the selection split

  // honest re-evaluation of the chosen slab
  std::size_t in_slab = 0, cov = 0;
  for (std::size_t i : eval) {
    double p = 0.0;
    const double* row = X.row(i);
    for (std::size_t c = 0; c < d; ++c) p += best_v[c] * row[c];
    if (p >= best_a && p <= best_b) {
      ++in_slab;
      cov += covered[i];
    }
  }
  if (in_slab == 0) return 1.0;
  return static_cast<double>(cov) / static_cast<double>(in_slab);
}

}  // namespace ces
