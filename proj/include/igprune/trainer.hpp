#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "igprune/data.hpp"
#include "igprune/error.hpp"
#include "igprune/mask.hpp"
#include "igprune/network.hpp"

namespace igprune {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  }
};

/// SGD with heavy-ball momentum. Masked weights and biases receive no update,
/// carry no velocity and are held at exactly zero.
class SgdOptimizer {
 public:
  SgdOptimizer() = default;
  SgdOptimizer(double learning_rate, double momentum) : lr_(learning_rate), momentum_(momentum) {}

  double learning_rate() const noexcept { return lr_; }
  void set_learning_rate(double lr) noexcept { lr_ = lr; }

  /// One update on `batch`; returns the batch loss before the update.
  double step(Network& net, const Batch& batch, const PruneMask* mask = nullptr) {
    if (mask) mask->check_congruent(net);
    GradientSet g = backward(net, batch);
    if (!std::isfinite(g.loss)) throw NumericError("sgd_step: non-finite loss");
    for (const auto& t : g.weights) check_finite(t);
    for (const auto& t : g.biases) check_finite(t);
    if (velocity_w_.size() != net.depth()) {
      velocity_w_.clear();
      velocity_b_.clear();
      for (const auto& l : net.layers()) {
        velocity_w_.emplace_back(l.weights.shape());
        velocity_b_.emplace_back(l.bias.shape());
      }
    }
    for (std::size_t l = 0; l < net.depth(); ++l) {
      Layer& layer = net.layer(l);
      const std::size_t units = layer.units();
      for (std::size_t i = 0; i < layer.weights.size(); ++i) {
        const bool masked = mask && (mask->weight_removed(l, i) || mask->neuron_removed(l, i % units));
        update(layer.weights[i], velocity_w_[l][i], g.weights[l][i], masked);
      }
      for (std::size_t n = 0; n < units; ++n) {
        update(layer.bias[n], velocity_b_[l][n], g.biases[l][n], mask && mask->neuron_removed(l, n));
      }
    }
    return g.loss;
  }

 private:
  static void check_finite(const Tensor& t) {
    for (double v : t.values()) {
      if (!std::isfinite(v)) throw NumericError("sgd_step: non-finite gradient");
    }
  }

  void update(double& w, double& v, double grad, bool masked) const {
    if (masked) {
      w = 0.0;
      v = 0.0;
      return;
    }
    v = momentum_ * v + grad;
    w -= lr_ * v;
  }

  double lr_ = 0.01;
  double momentum_ = 0.9;
  std::vector<Tensor> velocity_w_;
  std::vector<Tensor> velocity_b_;
};

/// Single stateless step (fresh momentum buffer, so the update is w - lr * grad).
inline double sgd_step(Network& net, const Batch& batch, const TrainConfig& config,
                       const PruneMask* mask = nullptr) {
  config.validate();
  SgdOptimizer opt(config.learning_rate, config.momentum);
  return opt.step(net, batch, mask);
}

/// Optimizer plus a seeded batch stream; repeated run() calls continue the
/// same stream and momentum.
class FineTuner {
 public:
  FineTuner(const Dataset& ds, const TrainConfig& config)
      : stream_((config.validate(), ds), config.batch_size, config.seed),
        opt_(config.learning_rate, config.momentum) {}

  std::vector<double> run(Network& net, std::size_t steps, const PruneMask* mask = nullptr) {
    std::vector<double> losses;
    losses.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) losses.push_back(opt_.step(net, stream_.next(), mask));
    return losses;
  }

  SgdOptimizer& optimizer() noexcept { return opt_; }

 private:
  BatchStream stream_;
  SgdOptimizer opt_;
};

/// O steps over the seeded batch stream; returns the per-step losses.
inline std::vector<double> finetune(Network& net, const Dataset& ds, std::size_t steps,
                                    const TrainConfig& config, const PruneMask* mask = nullptr) {
  if (steps == 0) return {};
  FineTuner tuner(ds, config);
  return tuner.run(net, steps, mask);
}

/// Index of the largest logit in each row; ties go to the lowest index.
inline std::vector<std::size_t> predict(const Network& net, const Tensor& inputs) {
  const Tensor logits = forward(net, inputs);
  const std::size_t classes = logits.dim(1);
  std::vector<std::size_t> out(logits.dim(0));
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (logits.at(r, c) > logits.at(r, best)) best = c;
    }
    out[r] = best;
  }
  return out;
}

/// Top-1 accuracy over the whole dataset.
inline double evaluate(const Network& net, const Dataset& ds) {
  if (ds.size() == 0) throw ConfigError("evaluate: empty dataset");
  const auto pred = predict(net, ds.inputs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == ds.labels[i];
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

/// Mean cross-entropy over the whole dataset.
inline double dataset_loss(const Network& net, const Dataset& ds) {
  return loss(forward(net, ds.inputs), ds.labels);
}

}  // namespace igprune
