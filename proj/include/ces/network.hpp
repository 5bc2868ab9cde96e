#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ces/matrix.hpp"

namespace ces {

enum class Activation { relu };

/// Shape of a dense feed-forward network: input size, hidden sizes, output
/// size. Two output heads are used for joint low/high quantile models.
struct NetworkSpec {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::relu;
  int output_heads = 1;
  std::uint64_t seed = 0;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }

  void validate() const;

  bool operator==(const NetworkSpec&) const = default;
};

struct LossKind {
  enum class Type { squared_error, cross_entropy, pinball, pinball_pair };

  Type type = Type::squared_error;
  int classes = 0;          // cross_entropy
  double beta_low = 0.0;    // pinball / pinball_pair
  double beta_high = 0.0;   // pinball_pair

  static LossKind squared_error() { return {Type::squared_error, 0, 0.0, 0.0}; }
  static LossKind cross_entropy(int k);
  static LossKind pinball(double beta);
  static LossKind pinball_pair(double lo, double hi);

  void validate() const;
  const char* name() const;

  bool operator==(const LossKind&) const = default;
};

/// Network snapshot taken during training. Weights are stored flat, per layer
/// a row-major weight matrix followed by the bias vector.
struct Checkpoint {
  int epoch = 0;
  NetworkSpec spec;
  std::vector<double> weights;
};

std::size_t weight_count(const NetworkSpec& spec);

/// Glorot-uniform initialization in +-sqrt(6/(fan_in+fan_out)), biases zero.
/// Deterministic given spec.seed.
std::vector<double> init_weights(const NetworkSpec& spec);

/// Reusable forward/backward buffers for one network shape.
struct Workspace {
  std::vector<std::vector<double>> act;    // act[0] = input copy, act[l] = layer l output
  std::vector<std::vector<double>> pre;    // pre-activations per layer
  std::vector<std::vector<double>> delta;  // backprop buffers
  void resize(const NetworkSpec& spec);
};

/// Forward pass writing into ws; returns span over the output activation.
std::span<const double> forward_into(const NetworkSpec& spec, std::span<const double> weights,
                                     std::span<const double> x, Workspace& ws);

/// Forward pass of a checkpoint on a single feature vector.
std::vector<double> forward(const Checkpoint& ckpt, std::span<const double> x);

std::vector<double> softmax(std::span<const double> logits);

/// Pinball loss rho_beta(y, yhat): beta (y - yhat) above the prediction,
/// (1 - beta)(yhat - y) otherwise.
double pinball_loss(double beta, double y, double yhat);

/// Per-sample loss of a network output. `target` holds the regression value,
/// the class index for cross-entropy, or (reconstruction) a full vector.
double sample_loss(const LossKind& loss, std::span<const double> output,
                   std::span<const double> target);

/// d(loss)/d(output), written into grad (same size as output).
void sample_loss_grad(const LossKind& loss, std::span<const double> output,
                      std::span<const double> target, std::span<double> grad);

/// Sum of per-sample losses over a dataset (the additive convention).
/// If `y` is empty, targets are the inputs themselves (reconstruction).
double eval_loss(const Checkpoint& ckpt, const Matrix& X, std::span<const double> y,
                 const LossKind& loss);

/// Sum of one head's pinball losses for a two-head quantile model.
/// head 0 uses beta_low, head 1 uses beta_high.
double eval_loss_head(const Checkpoint& ckpt, const Matrix& X, std::span<const double> y,
                      const LossKind& loss, int head);

}  // namespace ces
