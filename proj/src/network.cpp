#include "ces/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ces/kernels.hpp"
#include "ces/rng.hpp"

namespace ces {

void NetworkSpec::validate() const {
  if (layer_sizes.size() < 3) {
    throw std::invalid_argument("NetworkSpec: need input, at least one hidden, and output layer");
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw std::invalid_argument("NetworkSpec: zero layer size");
  }
  if (output_heads != 1 && output_heads != 2) {
    throw std::invalid_argument("NetworkSpec: output_heads must be 1 or 2");
  }
  if (output_heads == 2 && layer_sizes.back() != 2) {
    throw std::invalid_argument("NetworkSpec: two heads require an output layer of size 2");
  }
}

LossKind LossKind::cross_entropy(int k) {
  if (k < 2) throw std::invalid_argument("cross_entropy: need at least 2 classes");
  return {Type::cross_entropy, k, 0.0, 0.0};
}

LossKind LossKind::pinball(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("pinball: beta must be in (0,1)");
  return {Type::pinball, 0, beta, 0.0};
}

LossKind LossKind::pinball_pair(double lo, double hi) {
  if (!(lo > 0.0 && lo < 1.0 && hi > 0.0 && hi < 1.0)) {
    throw std::invalid_argument("pinball_pair: betas must be in (0,1)");
  }
  if (!(lo < hi)) throw std::invalid_argument("pinball_pair: beta_low must be below beta_high");
  return {Type::pinball_pair, 0, lo, hi};
}

void LossKind::validate() const {
  switch (type) {
    case Type::squared_error:
      return;
    case Type::cross_entropy:
      if (classes < 2) throw std::invalid_argument("cross_entropy: K >= 2 required");
      return;
    case Type::pinball:
      if (!(beta_low > 0.0 && beta_low < 1.0)) throw std::invalid_argument("pinball: bad beta");
      return;
    case Type::pinball_pair:
      if (!(beta_low > 0.0 && beta_low < beta_high && beta_high < 1.0)) {
        throw std::invalid_argument("pinball_pair: bad betas");
      }
      return;
  }
}

const char* LossKind::name() const {
  switch (type) {
    case Type::squared_error: return "squared_error";
    case Type::cross_entropy: return "cross_entropy";
    case Type::pinball: return "pinball";
    case Type::pinball_pair: return "pinball_pair";
  }
  return "?";
}

std::size_t weight_count(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    n += spec.layer_sizes[l + 1] * (spec.layer_sizes[l] + 1);
  }
  return n;
}

std::vector<double> init_weights(const NetworkSpec& spec) {
  spec.validate();
  std::vector<double> w(weight_count(spec));
  Rng rng(derive_seed(spec.seed, 0x1417));
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t fan_in = spec.layer_sizes[l];
    const std::size_t fan_out = spec.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_out * fan_in; ++i) {
      w[off + i] = rng.uniform(-bound, bound);
    }
    off += fan_out * fan_in;
    off += fan_out;  // biases stay zero
  }
  return w;
}

void Workspace::resize(const NetworkSpec& spec) {
  const std::size_t L = spec.layer_count();
  act.resize(L + 1);
  pre.resize(L + 1);
  delta.resize(L + 1);
  for (std::size_t l = 0; l <= L; ++l) {
    act[l].assign(spec.layer_sizes[l], 0.0);
    pre[l].assign(spec.layer_sizes[l], 0.0);
    delta[l].assign(spec.layer_sizes[l], 0.0);
  }
}

std::span<const double> forward_into(const NetworkSpec& spec, std::span<const double> weights,
                                     std::span<const double> x, Workspace& ws) {
  const auto& kt = simd::k();
  const std::size_t L = spec.layer_count();
  std::copy(x.begin(), x.end(), ws.act[0].begin());
  std::size_t off = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t rows = spec.layer_sizes[l + 1];
    const std::size_t cols = spec.layer_sizes[l];
    const double* W = weights.data() + off;
    const double* b = weights.data() + off + rows * cols;
    kt.matvec(W, ws.act[l].data(), b, ws.pre[l + 1].data(), rows, cols);
    if (l + 1 < L) {
      kt.relu(ws.pre[l + 1].data(), ws.act[l + 1].data(), rows);
    } else {
      std::copy(ws.pre[l + 1].begin(), ws.pre[l + 1].end(), ws.act[l + 1].begin());
    }
    off += rows * (cols + 1);
  }
  return {ws.act[L].data(), spec.output_size()};
}

std::vector<double> forward(const Checkpoint& ckpt, std::span<const double> x) {
  if (x.size() != ckpt.spec.input_size()) {
    throw std::invalid_argument("forward: feature dimension does not match network input size");
  }
  if (ckpt.weights.size() != weight_count(ckpt.spec)) {
    throw std::invalid_argument("forward: weight vector does not match network spec");
  }
  Workspace ws;
  ws.resize(ckpt.spec);
  auto out = forward_into(ckpt.spec, ckpt.weights, x, ws);
  return {out.begin(), out.end()};
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double pinball_loss(double beta, double y, double yhat) {
  const double d = y - yhat;
  return d > 0.0 ? beta * d : (1.0 - beta) * (-d);
}

namespace {

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

double sample_loss(const LossKind& loss, std::span<const double> output,
                   std::span<const double> target) {
  switch (loss.type) {
    case LossKind::Type::squared_error: {
      if (target.size() != output.size()) {
        throw std::invalid_argument("squared_error: target dimension mismatch");
      }
      return simd::k().sum_sq_diff(target.data(), output.data(), output.size());
    }
    case LossKind::Type::cross_entropy: {
      const int label = static_cast<int>(target[0]);
      if (label < 0 || label >= static_cast<int>(output.size())) {
        throw std::invalid_argument("cross_entropy: label out of range");
      }
      return log_sum_exp(output) - output[label];
    }
    case LossKind::Type::pinball:
      return pinball_loss(loss.beta_low, target[0], output[0]);
    case LossKind::Type::pinball_pair: {
      if (output.size() != 2) throw std::invalid_argument("pinball_pair: need two output heads");
      return pinball_loss(loss.beta_low, target[0], output[0]) +
             pinball_loss(loss.beta_high, target[0], output[1]);
    }
  }
  return 0.0;
}

void sample_loss_grad(const LossKind& loss, std::span<const double> output,
                      std::span<const double> target, std::span<double> grad) {
  switch (loss.type) {
    case LossKind::Type::squared_error: {
      for (std::size_t i = 0; i < output.size(); ++i) {
        grad[i] = 2.0 * (output[i] - target[i]);
      }
      return;
    }
    case LossKind::Type::cross_entropy: {
      const int label = static_cast<int>(target[0]);
      auto p = softmax(output);
      for (std::size_t i = 0; i < output.size(); ++i) grad[i] = p[i];
      grad[label] -= 1.0;
      return;
    }
    case LossKind::Type::pinball: {
      grad[0] = target[0] > output[0] ? -loss.beta_low : (1.0 - loss.beta_low);
      return;
    }
    case LossKind::Type::pinball_pair: {
      grad[0] = target[0] > output[0] ? -loss.beta_low : (1.0 - loss.beta_low);
      grad[1] = target[0] > output[1] ? -loss.beta_high : (1.0 - loss.beta_high);
      return;
    }
  }
}

namespace {

std::span<const double> target_span(const Matrix& X, std::span<const double> y, std::size_t i) {
  if (y.empty()) return X.row_span(i);  // reconstruction targets
  return {y.data() + i, 1};
}

}  // namespace

double eval_loss(const Checkpoint& ckpt, const Matrix& X, std::span<const double> y,
                 const LossKind& loss) {
  if (X.rows == 0) throw std::invalid_argument("eval_loss: empty dataset");
  if (!y.empty() && y.size() != X.rows) {
    throw std::invalid_argument("eval_loss: target count does not match rows");
  }
  Workspace ws;
  ws.resize(ckpt.spec);
  double total = 0.0;
  for (std::size_t i = 0; i < X.rows; ++i) {
    auto out = forward_into(ckpt.spec, ckpt.weights, X.row_span(i), ws);
    const double li = sample_loss(loss, out, target_span(X, y, i));
    if (!std::isfinite(li)) {
      throw std::runtime_error("eval_loss: non-finite per-sample loss at row " + std::to_string(i));
    }
    total += li;
  }
  return total;
}

double eval_loss_head(const Checkpoint& ckpt, const Matrix& X, std::span<const double> y,
                      const LossKind& loss, int head) {
  if (loss.type != LossKind::Type::pinball_pair) {
    throw std::invalid_argument("eval_loss_head: per-head evaluation needs a pinball_pair loss");
  }
  if (head != 0 && head != 1) throw std::invalid_argument("eval_loss_head: head must be 0 or 1");
  const double beta = head == 0 ? loss.beta_low : loss.beta_high;
  Workspace ws;
  ws.resize(ckpt.spec);
  double total = 0.0;
  for (std::size_t i = 0; i < X.rows; ++i) {
    auto out = forward_into(ckpt.spec, ckpt.weights, X.row_span(i), ws);
    const double li = pinball_loss(beta, y[i], out[head]);
    if (!std::isfinite(li)) {
      throw std::runtime_error("eval_loss_head: non-finite loss at row " + std::to_string(i));
    }
    total += li;
  }
  return total;
}

}  // namespace ces
