#pragma once

// Hand-built networks with known criterion behaviour, shared by the unit and
// acceptance tests.

#include <cmath>

#include "igprune/network.hpp"

namespace igprune::testing {

// Three hidden neurons fed by x = [1, 1, 1] through W = diag(w), each driving
// the class-0 logit with weight v. Label 0, so the loss falls as the logit
// margin d grows. Shrinking neuron n moves d by -(1 - t) v_n w_n:
//   (a) w = 0.5, v = 16: small weight, margin collapses as it shrinks.
//   (b) w = 3,   v = 2:  small gradient now, grows as the neuron shrinks.
//   (c) w = 1,   v = -8: shrinking it raises the margin, gradient vanishes.
struct ThreeNeuronFixture {
  Network net;
  Batch batch;
  static constexpr std::size_t a = 0, b = 1, c = 2;

  ThreeNeuronFixture() : net(build()), batch{Tensor({1, 3}, {1, 1, 1}), {0}} {}

  static Network build() {
    Layer hidden = Layer::dense(3, 3, Activation::relu);
    hidden.weights = Tensor({3, 3}, {0.5, 0, 0, 0, 3, 0, 0, 0, 1});
    Layer out = Layer::dense(3, 2, Activation::softmax);
    out.weights = Tensor({3, 2}, {16, 0, 2, 0, -8, 0});
    out.bias = Tensor({2}, {-3.5, 0});
    return Network({3}, {hidden, out});
  }
};

// One softmax layer with input x = [1, -1]. Neuron 0 has column [2, 2] and no
// bias, so its logit is 0 at every scale and its gradient never changes.
struct ConstantGradientFixture {
  Network net;
  Batch batch;

  ConstantGradientFixture() : net(build()), batch{Tensor({1, 2}, {1, -1}), {1}} {}

  static Network build() {
    Layer l = Layer::dense(2, 2, Activation::softmax);
    l.weights = Tensor({2, 2}, {2, 0.7, 2, -0.4});
    return Network({2}, {l});
  }

  // |p_0 - y_0| * ||x||_2 with logits [0, 1.1]
  double grad_norm() const {
    const double p0 = 1.0 / (1.0 + std::exp(1.1));
    return p0 * std::sqrt(2.0);
  }
};

}  // namespace igprune::testing
