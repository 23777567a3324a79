#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "igprune/error.hpp"
#include "igprune/network.hpp"

namespace igprune {

/// Removal flags of one layer. `neurons` has one entry per unit (structured);
/// `weights` is congruent to the weight tensor (unstructured). Non-zero = removed.
struct LayerMask {
  std::vector<std::uint8_t> neurons;
  std::vector<std::uint8_t> weights;

  friend bool operator==(const LayerMask&, const LayerMask&) = default;
};

/// Removed structures of a network. Entries are only ever added.
class PruneMask {
 public:
  PruneMask() = default;

  explicit PruneMask(const Network& net) {
    for (const auto& l : net.layers()) {
      layers_.push_back({std::vector<std::uint8_t>(l.units(), 0),
                         std::vector<std::uint8_t>(l.weights.size(), 0)});
    }
  }

  std::size_t depth() const noexcept { return layers_.size(); }
  const LayerMask& layer(std::size_t l) const { return layers_.at(l); }

  bool neuron_removed(std::size_t l, std::size_t n) const { return layers_.at(l).neurons.at(n) != 0; }
  bool weight_removed(std::size_t l, std::size_t i) const { return layers_.at(l).weights.at(i) != 0; }

  void remove_neuron(std::size_t l, std::size_t n) {
    check(l);
    if (n >= layers_[l].neurons.size()) {
      throw IndexError("mask: neuron " + std::to_string(n) + " out of range in layer " + std::to_string(l));
    }
    layers_[l].neurons[n] = 1;
  }

  void remove_weight(std::size_t l, std::size_t i) {
    check(l);
    if (i >= layers_[l].weights.size()) {
      throw IndexError("mask: weight " + std::to_string(i) + " out of range in layer " + std::to_string(l));
    }
    layers_[l].weights[i] = 1;
  }

  std::size_t active_neurons(std::size_t l) const {
    std::size_t n = 0;
    for (auto v : layers_.at(l).neurons) n += v == 0;
    return n;
  }

  std::size_t removed_neurons(std::size_t l) const { return layers_.at(l).neurons.size() - active_neurons(l); }

  /// True when no scalar weight is masked individually.
  bool structured() const {
    for (const auto& l : layers_) {
      for (auto v : l.weights) {
        if (v) return false;
      }
    }
    return true;
  }

  /// Every entry of `earlier` is also set here.
  bool contains(const PruneMask& earlier) const {
    if (earlier.layers_.size() != layers_.size()) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& a = earlier.layers_[l];
      const auto& b = layers_[l];
      if (a.neurons.size() != b.neurons.size() || a.weights.size() != b.weights.size()) return false;
      for (std::size_t i = 0; i < a.neurons.size(); ++i) {
        if (a.neurons[i] && !b.neurons[i]) return false;
      }
      for (std::size_t i = 0; i < a.weights.size(); ++i) {
        if (a.weights[i] && !b.weights[i]) return false;
      }
    }
    return true;
  }

  void check_congruent(const Network& net) const {
    if (layers_.size() != net.depth()) {
      throw DimensionError("mask has " + std::to_string(layers_.size()) + " layers, network has " +
                           std::to_string(net.depth()));
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = net.layer(l);
      if (layers_[l].neurons.size() != layer.units() ||
          layers_[l].weights.size() != layer.weights.size()) {
        throw DimensionError("mask layer " + std::to_string(l) + " is not congruent to the network");
      }
    }
  }

  friend bool operator==(const PruneMask&, const PruneMask&) = default;

 private:
  void check(std::size_t l) const {
    if (l >= layers_.size()) throw IndexError("mask: layer " + std::to_string(l) + " out of range");
  }

  std::vector<LayerMask> layers_;
};

/// Zeroes every masked weight column, bias entry and scalar weight.
inline void apply_mask(Network& net, const PruneMask& mask) {
  mask.check_congruent(net);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    Layer& layer = net.layer(l);
    const auto& lm = mask.layer(l);
    const std::size_t units = layer.units();
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      if (lm.weights[i] || lm.neurons[i % units]) layer.weights[i] = 0.0;
    }
    for (std::size_t n = 0; n < units; ++n) {
      if (lm.neurons[n]) layer.bias[n] = 0.0;
    }
  }
}

/// A weight is live when it is not masked, its neuron is not masked, and the
/// upstream unit feeding it is not masked.
inline bool weight_live(const Network& net, const PruneMask& mask, std::size_t l, std::size_t i) {
  const Layer& layer = net.layer(l);
  const std::size_t units = layer.units();
  const auto& lm = mask.layer(l);
  if (lm.weights[i] || lm.neurons[i % units]) return false;
  if (l == 0) return true;
  const std::size_t row = i / units;
  return !mask.neuron_removed(l - 1, row % net.input_units(l));
}

/// Live weights of layer l.
inline std::size_t live_weights(const Network& net, const PruneMask& mask, std::size_t l) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < net.layer(l).weights.size(); ++i) n += weight_live(net, mask, l, i);
  return n;
}

/// Live weights plus live biases of layer l: Omega(W_l) under the mask.
inline std::size_t count_layer_params(const Network& net, const PruneMask& mask, std::size_t l) {
  return live_weights(net, mask, l) + mask.active_neurons(l);
}

/// Omega(F) under the mask.
inline std::size_t count_params(const Network& net, const PruneMask& mask) {
  mask.check_congruent(net);
  std::size_t n = 0;
  for (std::size_t l = 0; l < net.depth(); ++l) n += count_layer_params(net, mask, l);
  return n;
}

/// Multiply-accumulates of one forward pass over live weights.
inline std::size_t count_flops(const Network& net, const PruneMask& mask) {
  mask.check_congruent(net);
  std::size_t n = 0;
  for (std::size_t l = 0; l < net.depth(); ++l) n += net.layer(l).positions() * live_weights(net, mask, l);
  return n;
}

inline std::size_t count_params(const Network& net) { return count_params(net, PruneMask(net)); }
inline std::size_t count_flops(const Network& net) { return count_flops(net, PruneMask(net)); }

}  // namespace igprune
