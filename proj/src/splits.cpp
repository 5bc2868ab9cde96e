#include "ces/splits.hpp"

#include <stdexcept>

#include "ces/rng.hpp"

namespace ces {

SplitIndices make_splits(std::size_t n, const SplitPlan& plan) {
  if (n < 4) throw std::invalid_argument("make_splits: need at least 4 samples");
  Rng rng(derive_seed(plan.seed, 0x5b11));
  const auto perm = rng.permutation(n);

  SplitIndices out;
  if (plan.mode == SplitMode::ces_two_way) {
    const std::size_t n_train = (3 * n) / 4;
    if (n_train == 0 || n_train == n) throw std::invalid_argument("make_splits: degenerate split");
    out.train.assign(perm.begin(), perm.begin() + n_train);
    out.select.assign(perm.begin() + n_train, perm.end());
    out.calibrate = out.select;
  } else {
    const std::size_t n_train = n / 2;
    const std::size_t n_select = n / 4;
    if (n_train == 0 || n_select == 0 || n_train + 2 * n_select > n + n_select) {
      throw std::invalid_argument("make_splits: degenerate split");
    }
    out.train.assign(perm.begin(), perm.begin() + n_train);
    out.select.assign(perm.begin() + n_train, perm.begin() + n_train + n_select);
    out.calibrate.assign(perm.begin() + n_train + n_select, perm.end());
  }
  return out;
}

}  // namespace ces
