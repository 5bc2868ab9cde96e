#pragma once

#include <string>

#include "ces/train.hpp"

namespace ces {

// Checkpoint store file layout (all integers little-endian u32 unless noted):
//   magic "CESCKPT1"
//   layer count, layer sizes...
//   loss tag (0 squared_error, 1 cross_entropy, 2 pinball, 3 pinball_pair)
//     cross_entropy: u32 class count
//     pinball:       f64 beta
//     pinball_pair:  f64 beta_low, f64 beta_high
//   tau, t_max, checkpoint count
//   per checkpoint: u32 epoch, f64 weights in layer order
//   CRC32 (IEEE) of every preceding byte including the magic
//
// Only the fields above are persisted; a loaded TrainConfig carries default
// optimizer settings.

void save_store(const CheckpointStore& store, const std::string& path);

CheckpointStore load_store(const std::string& path);

/// Equality on the persisted projection of a store (shape, loss, tau, t_max,
/// epochs, bit-exact weights).
bool store_equal(const CheckpointStore& a, const CheckpointStore& b);

}  // namespace ces
