#pragma once

#include <cstdint>
#include <vector>

#include "ces/matrix.hpp"
#include "ces/network.hpp"

namespace ces {

struct OptimizerCfg {
  enum class Kind { sgd, adam };
  Kind kind = Kind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerCfg sgd(double lr) { return {Kind::sgd, lr, 0, 0, 0}; }
  static OptimizerCfg adam(double lr, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
    return {Kind::adam, lr, b1, b2, eps};
  }

  bool operator==(const OptimizerCfg&) const = default;
};

struct TrainConfig {
  int t_max = 100;
  int tau = 1;  // storage period: a snapshot is taken every tau epochs
  OptimizerCfg optimizer;
  int batch_size = 25;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  int snapshot_count() const { return t_max / tau; }
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Ordered sequence of snapshots of one training run. Immutable once built;
/// safe to share across threads.
struct CheckpointStore {
  std::vector<Checkpoint> checkpoints;
  LossKind loss;
  TrainConfig config;

  std::size_t size() const { return checkpoints.size(); }
  const NetworkSpec& spec() const { return checkpoints.front().spec; }
};

/// Trains by minibatch gradient descent and snapshots the weights after every
/// tau epochs, giving floor(t_max/tau) checkpoints at epochs tau, 2*tau, ...
/// Deterministic given the seeds in `spec` (initialization) and `cfg`
/// (shuffling). If `y` is empty the network is trained to reconstruct its
/// input (squared error only).
CheckpointStore train_with_snapshots(const Matrix& X, const std::vector<double>& y,
                                     const NetworkSpec& spec, const LossKind& loss,
                                     const TrainConfig& cfg);

}  // namespace ces
