#include "ces/train.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ces/kernels.hpp"
#include "ces/rng.hpp"

namespace ces {

void TrainConfig::validate() const {
  if (t_max < 1) throw std::invalid_argument("TrainConfig: t_max must be positive");
  if (tau < 1 || tau > t_max) throw std::invalid_argument("TrainConfig: need 1 <= tau <= t_max");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be positive");
  if (weight_decay < 0) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
  if (optimizer.lr <= 0) throw std::invalid_argument("TrainConfig: learning rate must be positive");
}

namespace {

void check_targets(const Matrix& X, const std::vector<double>& y, const NetworkSpec& spec,
                   const LossKind& loss) {
  if (X.rows == 0) throw std::invalid_argument("train: empty dataset");
  if (X.cols != spec.input_size()) throw std::invalid_argument("train: feature dimension mismatch");
  if (y.empty()) {
    if (loss.type != LossKind::Type::squared_error || spec.output_size() != X.cols) {
      throw std::invalid_argument("train: reconstruction mode needs squared error and matching output size");
    }
    return;
  }
  if (y.size() != X.rows) throw std::invalid_argument("train: target count mismatch");
  switch (loss.type) {
    case LossKind::Type::cross_entropy:
      if (spec.output_size() != static_cast<std::size_t>(loss.classes)) {
        throw std::invalid_argument("train: output size must equal class count");
      }
      for (double v : y) {
        const int label = static_cast<int>(v);
        if (label < 0 || label >= loss.classes || static_cast<double>(label) != v) {
          throw std::invalid_argument("train: cross-entropy targets must be class indices");
        }
      }
      break;
    case LossKind::Type::pinball_pair:
      if (spec.output_size() != 2 || spec.output_heads != 2) {
        throw std::invalid_argument("train: pinball_pair needs a two-head network");
      }
      break;
    case LossKind::Type::squared_error:
    case LossKind::Type::pinball:
      if (spec.output_size() != 1) {
        throw std::invalid_argument("train: scalar regression loss needs one output");
      }
      break;
  }
}

// Backprop for one sample; accumulates dL/dw into grad.
void accumulate_gradient(const NetworkSpec& spec, std::span<const double> weights,
                         std::span<const double> x, std::span<const double> target,
                         const LossKind& loss, Workspace& ws, std::vector<double>& grad) {
  const auto& kt = simd::k();
  const std::size_t L = spec.layer_count();
  auto out = forward_into(spec, weights, x, ws);
  sample_loss_grad(loss, out, target, {ws.delta[L].data(), out.size()});

  // Walk layers backwards; grad layout mirrors the weight layout.
  std::size_t off_end = grad.size();
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t rows = spec.layer_sizes[l + 1];
    const std::size_t cols = spec.layer_sizes[l];
    const std::size_t off = off_end - rows * (cols + 1);
    double* gW = grad.data() + off;
    double* gb = grad.data() + off + rows * cols;
    const double* W = weights.data() + off;
    double* d = ws.delta[l + 1].data();

    kt.rank1_update(gW, d, ws.act[l].data(), 1.0, rows, cols);
    kt.axpy(1.0, d, gb, rows);
    if (l > 0) {
      kt.matvec_t(W, d, ws.delta[l].data(), rows, cols);
      kt.relu_grad_mask(ws.pre[l].data(), ws.delta[l].data(), cols);
    }
    off_end = off;
  }
}

}  // namespace

CheckpointStore train_with_snapshots(const Matrix& X, const std::vector<double>& y,
                                     const NetworkSpec& spec, const LossKind& loss,
                                     const TrainConfig& cfg) {
  spec.validate();
  loss.validate();
  cfg.validate();
  check_targets(X, y, spec, loss);

  const auto& kt = simd::k();
  std::vector<double> weights = init_weights(spec);
  const std::size_t nw = weights.size();
  std::vector<double> grad(nw, 0.0);
  std::vector<double> adam_m, adam_v;
  const bool adam = cfg.optimizer.kind == OptimizerCfg::Kind::adam;
  if (adam) {
    adam_m.assign(nw, 0.0);
    adam_v.assign(nw, 0.0);
  }

  Workspace ws;
  ws.resize(spec);
  Rng shuffle_rng(derive_seed(cfg.seed, 0x5c1e));

  CheckpointStore store;
  store.loss = loss;
  store.config = cfg;
  store.checkpoints.reserve(cfg.snapshot_count());

  long step = 0;
  for (int epoch = 1; epoch <= cfg.t_max; ++epoch) {
    const auto order = shuffle_rng.permutation(X.rows);
    double epoch_loss = 0.0;
    std::size_t pos = 0;
    while (pos < X.rows) {
      const std::size_t bsz = std::min<std::size_t>(cfg.batch_size, X.rows - pos);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = 0; b < bsz; ++b) {
        const std::size_t i = order[pos + b];
        const std::span<const double> target =
            y.empty() ? X.row_span(i) : std::span<const double>{y.data() + i, 1};
        accumulate_gradient(spec, weights, X.row_span(i), target, loss, ws, grad);
        epoch_loss += sample_loss(loss, {ws.act.back().data(), spec.output_size()}, target);
      }
      const double inv = 1.0 / static_cast<double>(bsz);
      for (double& g : grad) g *= inv;
      ++step;
      if (adam) {
        const double bc1 = 1.0 - std::pow(cfg.optimizer.beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(cfg.optimizer.beta2, static_cast<double>(step));
        kt.adam_step(weights.data(), adam_m.data(), adam_v.data(), grad.data(), cfg.optimizer.lr,
                     cfg.optimizer.beta1, cfg.optimizer.beta2, cfg.optimizer.eps,
                     cfg.weight_decay, bc1, bc2, nw);
      } else {
        kt.sgd_step(weights.data(), grad.data(), cfg.optimizer.lr, cfg.weight_decay, nw);
      }
      pos += bsz;
    }
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("train: non-finite training loss at epoch " + std::to_string(epoch));
    }
    if (epoch % cfg.tau == 0) {
      store.checkpoints.push_back({epoch, spec, weights});
    }
  }
  return store;
}

}  // namespace ces
