#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "igprune/network.hpp"

namespace igprune::testing {

inline Batch random_batch(const Network& net, std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<std::size_t> shape{n};
  shape.insert(shape.end(), net.input_shape().begin(), net.input_shape().end());
  Batch b{Tensor(shape), {}};
  for (double& v : b.inputs.values()) v = normal(rng);
  std::uniform_int_distribution<std::size_t> label(0, net.output_dim() - 1);
  for (std::size_t i = 0; i < n; ++i) b.labels.push_back(label(rng));
  return b;
}

/// Random biases too, so no unit sits exactly at a ReLU kink by construction.
inline void randomize_biases(Network& net, std::uint64_t seed, double scale = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    for (double& b : net.layer(l).bias.values()) b = normal(rng);
  }
}

inline bool close(double a, double b, double rel, double abs_tol) {
  return std::abs(a - b) <= std::max(abs_tol, rel * std::max(std::abs(a), std::abs(b)));
}

}  // namespace igprune::testing
