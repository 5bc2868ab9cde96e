#pragma once

#include <cstdint>
#include <vector>

namespace ces {

/// Two-way mode: 75% training / 25% shared early-stopping + calibration.
/// Three-way mode: 50% training / 25% early-stopping selection / 25%
/// calibration (the data-splitting benchmark).
enum class SplitMode { ces_two_way, three_way };

struct SplitPlan {
  SplitMode mode = SplitMode::ces_two_way;
  std::uint64_t seed = 0;
};

/// Disjoint index sets covering {0, ..., n-1}. In two-way mode `select` and
/// `calibrate` alias the same 25% block.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> select;
  std::vector<std::size_t> calibrate;
};

SplitIndices make_splits(std::size_t n, const SplitPlan& plan);

}  // namespace ces
