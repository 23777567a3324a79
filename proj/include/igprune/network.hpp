#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "igprune/error.hpp"
#include "igprune/tensor.hpp"

namespace igprune {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

enum class LayerKind : std::uint8_t { dense = 0, conv2d = 1 };

/// `softmax` marks the output layer: forward() returns its pre-softmax logits and
/// the softmax is folded into the cross-entropy loss.
enum class Activation : std::uint8_t { relu = 0, identity = 1, softmax = 2 };

inline const char* to_string(LayerKind k) { return k == LayerKind::dense ? "dense" : "conv2d"; }

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

/// One feed-forward layer.
///
/// The weight tensor is always viewed as a (fan_in x units) matrix: a dense
/// layer stores (n_in x n_out), a convolution stores (k x k x c_in x c_out),
/// which flattens row-major to ((k*k*c_in) x c_out). Column n is the n-th
/// neuron (dense) or the n-th output-channel filter bank (conv). Convolutions
/// use stride 1 and no padding over NHWC inputs.
struct Layer {
  LayerKind kind = LayerKind::dense;
  Activation activation = Activation::relu;
  Tensor weights;
  Tensor bias;
  std::size_t in_h = 0;  // conv only
  std::size_t in_w = 0;  // conv only

  static Layer dense(std::size_t n_in, std::size_t n_out, Activation act = Activation::relu) {
    if (n_in == 0 || n_out == 0) throw DimensionError("dense layer needs positive dimensions");
    Layer l;
    l.kind = LayerKind::dense;
    l.activation = act;
    l.weights = Tensor({n_in, n_out});
    l.bias = Tensor({n_out});
    return l;
  }

  static Layer conv2d(std::size_t in_h, std::size_t in_w, std::size_t c_in, std::size_t c_out,
                      std::size_t k, Activation act = Activation::relu) {
    if (k == 0 || c_in == 0 || c_out == 0 || in_h < k || in_w < k) {
      throw DimensionError("conv2d layer: kernel " + std::to_string(k) + " does not fit input " +
                           std::to_string(in_h) + "x" + std::to_string(in_w));
    }
    Layer l;
    l.kind = LayerKind::conv2d;
    l.activation = act;
    l.weights = Tensor({k, k, c_in, c_out});
    l.bias = Tensor({c_out});
    l.in_h = in_h;
    l.in_w = in_w;
    return l;
  }

  std::size_t units() const { return weights.shape().back(); }
  std::size_t fan_in() const { return weights.size() / units(); }
  std::size_t kernel() const { return kind == LayerKind::conv2d ? weights.dim(0) : 1; }
  std::size_t in_channels() const { return kind == LayerKind::conv2d ? weights.dim(2) : fan_in(); }
  std::size_t out_h() const { return kind == LayerKind::conv2d ? in_h - kernel() + 1 : 1; }
  std::size_t out_w() const { return kind == LayerKind::conv2d ? in_w - kernel() + 1 : 1; }
  /// Output positions sharing each neuron's filter (1 for dense).
  std::size_t positions() const { return out_h() * out_w(); }
  std::size_t input_size() const {
    return kind == LayerKind::conv2d ? in_h * in_w * in_channels() : fan_in();
  }
  std::size_t output_size() const { return positions() * units(); }
  std::size_t param_count() const { return weights.size() + bias.size(); }

  ConstMatrixMap weight_matrix() const { return ConstMatrixMap(weights.data(), fan_in(), units()); }
  MatrixMap weight_matrix() { return MatrixMap(weights.data(), fan_in(), units()); }

  /// Output shape of one sample: {units} or {out_h, out_w, units}.
  std::vector<std::size_t> output_shape() const {
    if (kind == LayerKind::conv2d) return {out_h(), out_w(), units()};
    return {units()};
  }
};

/// Labelled inputs: `inputs` is (B x features) or (B x H x W x C).
struct Batch {
  Tensor inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
};

/// Per-layer gradients congruent to the weights and biases.
struct GradientSet {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
  double loss = 0.0;
};

/// Ordered stack of layers realizing F : R^{input} -> R^{n_o}.
class Network {
 public:
  Network() = default;

  Network(std::vector<std::size_t> input_shape, std::vector<Layer> layers)
      : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
    validate();
  }

  const std::vector<std::size_t>& input_shape() const noexcept { return input_shape_; }
  std::size_t input_dim() const { return Tensor::element_count(input_shape_); }
  std::size_t output_dim() const { return layers_.back().output_size(); }
  std::size_t depth() const noexcept { return layers_.size(); }

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t l) const { return layers_.at(check_layer(l)); }
  Layer& layer(std::size_t l) { return layers_.at(check_layer(l)); }

  /// Number of units feeding layer l (input channels/features for l = 0).
  std::size_t input_units(std::size_t l) const {
    if (l == 0) return input_shape_.size() == 3 ? input_shape_[2] : input_dim();
    return layers_[l - 1].units();
  }

  std::size_t check_layer(std::size_t l) const {
    if (l >= layers_.size()) {
      throw IndexError("layer index " + std::to_string(l) + " out of range (depth " +
                       std::to_string(layers_.size()) + ")");
    }
    return l;
  }

  void check_neuron(std::size_t l, std::size_t n) const {
    if (n >= layer(l).units()) {
      throw IndexError("neuron " + std::to_string(n) + " out of range for layer " +
                       std::to_string(l) + " with " + std::to_string(layer(l).units()) + " units");
    }
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.param_count();
    return n;
  }

  friend bool operator==(const Network& a, const Network& b) {
    if (a.input_shape_ != b.input_shape_ || a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
      const auto& x = a.layers_[i];
      const auto& y = b.layers_[i];
      if (x.kind != y.kind || x.activation != y.activation || x.in_h != y.in_h ||
          x.in_w != y.in_w || !(x.weights == y.weights) || !(x.bias == y.bias)) {
        return false;
      }
    }
    return true;
  }

 private:
  void validate() const {
    if (layers_.empty()) throw DimensionError("network needs at least one layer");
    if (input_shape_.empty()) throw DimensionError("network input shape is empty");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& cur = layers_[l];
      const std::string where = "layer " + std::to_string(l) + " (" + to_string(cur.kind) + ")";
      if (cur.bias.size() != cur.units()) throw DimensionError(where + ": bias length mismatch");
      if (cur.activation == Activation::softmax && l + 1 != layers_.size()) {
        throw DimensionError(where + ": softmax is only allowed on the output layer");
      }
      if (cur.kind == LayerKind::conv2d) {
        std::vector<std::size_t> expect{cur.in_h, cur.in_w, cur.in_channels()};
        std::vector<std::size_t> got =
            l == 0 ? input_shape_ : layers_[l - 1].output_shape();
        if (got != expect) {
          throw DimensionError(where + ": expects input " + Tensor::shape_string(expect) +
                               ", previous stage produces " + Tensor::shape_string(got));
        }
      } else {
        std::size_t got = l == 0 ? input_dim() : layers_[l - 1].output_size();
        if (got != cur.fan_in()) {
          throw DimensionError(where + ": expects " + std::to_string(cur.fan_in()) +
                               " inputs, previous stage produces " + std::to_string(got));
        }
      }
    }
  }

  std::vector<std::size_t> input_shape_;
  std::vector<Layer> layers_;
};

namespace detail {

/// Patch matrix of a stride-1 valid convolution: one row per (sample, position).
inline Matrix im2col(const Layer& layer, const Matrix& x) {
  const std::size_t k = layer.kernel(), c = layer.in_channels();
  const std::size_t oh = layer.out_h(), ow = layer.out_w(), w = layer.in_w;
  const auto batch = static_cast<std::size_t>(x.rows());
  Matrix patches(batch * oh * ow, k * k * c);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = x.data() + b * x.cols();
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double* dst = patches.data() + ((b * oh + i) * ow + j) * patches.cols();
        for (std::size_t ki = 0; ki < k; ++ki) {
          const double* line = src + ((i + ki) * w + j) * c;
          std::copy(line, line + k * c, dst + ki * k * c);
        }
      }
    }
  }
  return patches;
}

inline Matrix col2im(const Layer& layer, const Matrix& dpatches, std::size_t batch) {
  const std::size_t k = layer.kernel(), c = layer.in_channels();
  const std::size_t oh = layer.out_h(), ow = layer.out_w(), w = layer.in_w;
  Matrix dx = Matrix::Zero(static_cast<Eigen::Index>(batch),
                           static_cast<Eigen::Index>(layer.input_size()));
  for (std::size_t b = 0; b < batch; ++b) {
    double* dst = dx.data() + b * dx.cols();
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double* src = dpatches.data() + ((b * oh + i) * ow + j) * dpatches.cols();
        for (std::size_t ki = 0; ki < k; ++ki) {
          double* line = dst + ((i + ki) * w + j) * c;
          for (std::size_t q = 0; q < k * c; ++q) line[q] += src[ki * k * c + q];
        }
      }
    }
  }
  return dx;
}

/// Pre-activation of a layer for a batch of flattened inputs.
inline Matrix linear(const Layer& layer, const Matrix& x) {
  const auto w = layer.weight_matrix();
  const Eigen::Map<const Eigen::RowVectorXd> b(layer.bias.data(),
                                               static_cast<Eigen::Index>(layer.units()));
  if (layer.kind == LayerKind::dense) {
    Matrix z = x * w;
    z.rowwise() += b;
    return z;
  }
  Matrix z = im2col(layer, x) * w;
  z.rowwise() += b;
  // (B*positions x units) row-major is (B x positions*units) row-major.
  z.resize(x.rows(), static_cast<Eigen::Index>(layer.output_size()));
  return z;
}

inline Matrix activate(Activation act, const Matrix& z) {
  if (act == Activation::relu) return z.cwiseMax(0.0);
  return z;
}

/// dL/dz from dL/da; relu'(0) is taken as 0.
inline Matrix activation_backward(Activation act, const Matrix& z, const Matrix& da) {
  if (act == Activation::relu) return (z.array() > 0.0).select(da, 0.0);
  return da;
}

/// Accumulates weight/bias gradients of `layer` and returns dL/dx.
inline Matrix linear_backward(const Layer& layer, const Matrix& x, const Matrix& dz,
                              Tensor* dweights, Tensor* dbias, bool need_dx) {
  const auto w = layer.weight_matrix();
  const auto units = static_cast<Eigen::Index>(layer.units());
  if (layer.kind == LayerKind::dense) {
    if (dweights) MatrixMap(dweights->data(), w.rows(), w.cols()).noalias() += x.transpose() * dz;
    if (dbias) Eigen::Map<Vector>(dbias->data(), units) += dz.colwise().sum().transpose();
    if (!need_dx) return {};
    return dz * w.transpose();
  }
  const Eigen::Index rows = dz.rows() * static_cast<Eigen::Index>(layer.positions());
  ConstMatrixMap dzr(dz.data(), rows, units);
  Matrix patches = im2col(layer, x);
  if (dweights) MatrixMap(dweights->data(), w.rows(), w.cols()).noalias() += patches.transpose() * dzr;
  if (dbias) Eigen::Map<Vector>(dbias->data(), units) += dzr.colwise().sum().transpose();
  if (!need_dx) return {};
  Matrix dpatches = dzr * w.transpose();
  return col2im(layer, dpatches, static_cast<std::size_t>(dz.rows()));
}

}  // namespace detail

/// Activations recorded by a forward pass starting at layer `first`.
struct Trace {
  std::size_t first = 0;
  std::vector<Matrix> inputs;  // inputs[i] feeds layer first + i
  std::vector<Matrix> pre;     // pre-activations of layer first + i
  Matrix logits;
};

inline Matrix as_matrix(const Network& net, const Tensor& inputs) {
  const std::size_t dim = net.input_dim();
  if (inputs.empty() || inputs.size() % dim != 0 || inputs.dim(0) * dim != inputs.size()) {
    throw DimensionError("layer 0: batch input " + Tensor::shape_string(inputs.shape()) +
                         " does not match network input " +
                         Tensor::shape_string(net.input_shape()));
  }
  return ConstMatrixMap(inputs.data(), static_cast<Eigen::Index>(inputs.dim(0)),
                        static_cast<Eigen::Index>(dim));
}

/// Runs layers first..L-1 on `x`, recording everything backward() needs.
inline Trace forward_trace(const Network& net, Matrix x, std::size_t first = 0) {
  Trace t;
  t.first = first;
  const std::size_t n = net.depth() - first;
  t.inputs.reserve(n);
  t.pre.reserve(n);
  for (std::size_t l = first; l < net.depth(); ++l) {
    const Layer& layer = net.layer(l);
    if (static_cast<std::size_t>(x.cols()) != layer.input_size()) {
      throw DimensionError("layer " + std::to_string(l) + ": input width " +
                           std::to_string(x.cols()) + " != expected " +
                           std::to_string(layer.input_size()));
    }
    Matrix z = detail::linear(layer, x);
    Matrix a = detail::activate(layer.activation, z);
    t.inputs.push_back(std::move(x));
    t.pre.push_back(std::move(z));
    x = std::move(a);
  }
  t.logits = std::move(x);
  return t;
}

/// Logits (B x n_o) of a batch.
inline Tensor forward(const Network& net, const Tensor& inputs) {
  Trace t = forward_trace(net, as_matrix(net, inputs));
  Tensor out({static_cast<std::size_t>(t.logits.rows()), net.output_dim()});
  std::copy(t.logits.data(), t.logits.data() + t.logits.size(), out.data());
  return out;
}

inline Tensor forward(const Network& net, const Batch& batch) { return forward(net, batch.inputs); }

namespace detail {

inline void check_labels(std::span<const std::size_t> labels, std::size_t rows, std::size_t classes) {
  if (labels.size() != rows) {
    throw DimensionError("loss: " + std::to_string(rows) + " logit rows but " +
                         std::to_string(labels.size()) + " labels");
  }
  for (std::size_t y : labels) {
    if (y >= classes) {
      throw IndexError("label " + std::to_string(y) + " out of range for " +
                       std::to_string(classes) + " classes");
    }
  }
}

/// Mean softmax cross-entropy; optionally writes dL/dlogits.
inline double cross_entropy(const Matrix& logits, std::span<const std::size_t> labels,
                            Matrix* dlogits, double scale) {
  double total = 0.0;
  if (dlogits) dlogits->resize(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const double m = row.maxCoeff();
    const double sum = (row.array() - m).exp().sum();
    const double lse = m + std::log(sum);
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)]);
    total += lse - row(y);
    if (dlogits) {
      dlogits->row(r) = (row.array() - lse).exp() * scale;
      (*dlogits)(r, y) -= scale;
    }
  }
  return total / static_cast<double>(logits.rows());
}

}  // namespace detail

/// Mean softmax cross-entropy of logits (B x C) against class labels.
inline double loss(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 2) throw DimensionError("loss: logits must be rank 2");
  detail::check_labels(labels, logits.dim(0), logits.dim(1));
  ConstMatrixMap m(logits.data(), static_cast<Eigen::Index>(logits.dim(0)),
                   static_cast<Eigen::Index>(logits.dim(1)));
  return detail::cross_entropy(m, labels, nullptr, 0.0);
}

inline double loss(const Network& net, const Batch& batch) {
  return loss(forward(net, batch), batch.labels);
}

inline GradientSet zero_gradients(const Network& net) {
  GradientSet g;
  for (const auto& l : net.layers()) {
    g.weights.emplace_back(l.weights.shape());
    g.biases.emplace_back(l.bias.shape());
  }
  return g;
}

/// Backpropagates dL/dlogits through a trace. Gradients of layers in the trace
/// are accumulated into `grads` (indexed by absolute layer). Returns dL/d(input
/// of trace.first) when `need_input_grad` is set.
inline Matrix backward_trace(const Network& net, const Trace& trace, Matrix dlogits,
                             GradientSet* grads, bool need_input_grad = false) {
  Matrix da = std::move(dlogits);
  for (std::size_t i = trace.pre.size(); i-- > 0;) {
    const std::size_t l = trace.first + i;
    const Layer& layer = net.layer(l);
    Matrix dz = detail::activation_backward(layer.activation, trace.pre[i], da);
    const bool need_dx = i > 0 || need_input_grad;
    da = detail::linear_backward(layer, trace.inputs[i], dz, grads ? &grads->weights[l] : nullptr,
                                 grads ? &grads->biases[l] : nullptr, need_dx);
  }
  return da;
}

/// Exact gradients of the batch-mean cross-entropy w.r.t. every weight and bias.
inline GradientSet backward(const Network& net, const Batch& batch) {
  Trace t = forward_trace(net, as_matrix(net, batch.inputs));
  detail::check_labels(batch.labels, static_cast<std::size_t>(t.logits.rows()), net.output_dim());
  Matrix dlogits;
  GradientSet g = zero_gradients(net);
  g.loss = detail::cross_entropy(t.logits, batch.labels, &dlogits,
                                 1.0 / static_cast<double>(batch.size()));
  backward_trace(net, t, std::move(dlogits), &g);
  return g;
}

enum class ParamKind { weight, bias };

/// Central difference (L(w+h) - L(w-h)) / 2h of one parameter. The network is
/// mutated transiently and restored bit-exactly.
inline double finite_diff_grad(Network& net, const Batch& batch, std::size_t layer_index,
                               std::size_t flat_index, double h,
                               ParamKind which = ParamKind::weight) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  Tensor& t = which == ParamKind::weight ? net.layer(layer_index).weights
                                         : net.layer(layer_index).bias;
  if (flat_index >= t.size()) {
    throw IndexError("finite_diff_grad: index " + std::to_string(flat_index) +
                     " out of range for layer " + std::to_string(layer_index));
  }
  const double saved = t[flat_index];
  struct Restore {
    Tensor& t;
    std::size_t i;
    double v;
    ~Restore() { t[i] = v; }
  } restore{t, flat_index, saved};
  t[flat_index] = saved + h;
  const double up = loss(net, batch);
  t[flat_index] = saved - h;
  const double down = loss(net, batch);
  return (up - down) / (2.0 * h);
}

/// Saved values of a neuron (weight column + bias entry) or of a single weight.
/// Restores them on restore() or destruction, whichever comes first.
class RestoreToken {
 public:
  RestoreToken() = default;
  RestoreToken(const RestoreToken&) = delete;
  RestoreToken& operator=(const RestoreToken&) = delete;
  RestoreToken(RestoreToken&& o) noexcept { *this = std::move(o); }
  RestoreToken& operator=(RestoreToken&& o) noexcept {
    if (this != &o) {
      restore();
      net_ = std::exchange(o.net_, nullptr);
      layer_ = o.layer_;
      indices_ = std::move(o.indices_);
      saved_ = std::move(o.saved_);
      bias_index_ = o.bias_index_;
      saved_bias_ = o.saved_bias_;
    }
    return *this;
  }
  ~RestoreToken() { restore(); }

  void restore() noexcept {
    if (!net_) return;
    Layer& l = net_->layer(layer_);
    for (std::size_t i = 0; i < indices_.size(); ++i) l.weights[indices_[i]] = saved_[i];
    if (bias_index_ != kNoBias) l.bias[bias_index_] = saved_bias_;
    net_ = nullptr;
  }

  bool active() const noexcept { return net_ != nullptr; }

 private:
  static constexpr std::size_t kNoBias = static_cast<std::size_t>(-1);

  friend RestoreToken scale_neuron(Network&, std::size_t, std::size_t, double);
  friend RestoreToken scale_weight(Network&, std::size_t, std::size_t, double);

  Network* net_ = nullptr;
  std::size_t layer_ = 0;
  std::vector<std::size_t> indices_;
  std::vector<double> saved_;
  std::size_t bias_index_ = kNoBias;
  double saved_bias_ = 0.0;
};

inline void check_factor(double factor) {
  if (!(factor >= 0.0 && factor <= 1.0)) {
    throw ConfigError("scale factor must lie in [0, 1], got " + std::to_string(factor));
  }
}

/// Multiplies neuron n of layer l (weight column and bias entry) by `factor`.
inline RestoreToken scale_neuron(Network& net, std::size_t layer_index, std::size_t neuron,
                                 double factor) {
  check_factor(factor);
  net.check_neuron(layer_index, neuron);
  Layer& l = net.layer(layer_index);
  RestoreToken tok;
  const std::size_t units = l.units();
  for (std::size_t r = 0; r < l.fan_in(); ++r) {
    const std::size_t i = r * units + neuron;
    tok.indices_.push_back(i);
    tok.saved_.push_back(l.weights[i]);
    l.weights[i] *= factor;
  }
  tok.bias_index_ = neuron;
  tok.saved_bias_ = l.bias[neuron];
  l.bias[neuron] *= factor;
  tok.net_ = &net;
  tok.layer_ = layer_index;
  return tok;
}

/// Multiplies a single scalar weight by `factor` (unstructured counterpart of scale_neuron).
inline RestoreToken scale_weight(Network& net, std::size_t layer_index, std::size_t flat_index,
                                 double factor) {
  check_factor(factor);
  Layer& l = net.layer(layer_index);
  if (flat_index >= l.weights.size()) {
    throw IndexError("weight " + std::to_string(flat_index) + " out of range for layer " +
                     std::to_string(layer_index));
  }
  RestoreToken tok;
  tok.indices_.push_back(flat_index);
  tok.saved_.push_back(l.weights[flat_index]);
  l.weights[flat_index] *= factor;
  tok.net_ = &net;
  tok.layer_ = layer_index;
  return tok;
}

/// He-normal weights, zero biases.
inline void init_he(Network& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    Layer& layer = net.layer(l);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(layer.fan_in())));
    for (double& w : layer.weights.values()) w = dist(rng);
    layer.bias.fill(0.0);
  }
}

/// ReLU MLP with a softmax output: widths = {input, hidden..., classes}.
inline Network make_mlp(const std::vector<std::size_t>& widths, std::uint64_t seed) {
  if (widths.size() < 2) throw ConfigError("mlp needs at least input and output widths");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const bool last = i + 2 == widths.size();
    layers.push_back(Layer::dense(widths[i], widths[i + 1],
                                  last ? Activation::softmax : Activation::relu));
  }
  Network net({widths.front()}, std::move(layers));
  init_he(net, seed);
  return net;
}

struct ConvSpec {
  std::size_t kernel = 3;
  std::size_t channels = 8;
};

/// ReLU conv stack over an (h x w x c) image followed by ReLU dense layers and a softmax output.
inline Network make_convnet(std::size_t h, std::size_t w, std::size_t c,
                            const std::vector<ConvSpec>& convs,
                            const std::vector<std::size_t>& dense_widths, std::size_t classes,
                            std::uint64_t seed) {
  std::vector<Layer> layers;
  std::size_t ch = h, cw = w, cc = c;
  for (const auto& cs : convs) {
    layers.push_back(Layer::conv2d(ch, cw, cc, cs.channels, cs.kernel));
    ch = ch - cs.kernel + 1;
    cw = cw - cs.kernel + 1;
    cc = cs.channels;
  }
  std::size_t in = ch * cw * cc;
  for (std::size_t width : dense_widths) {
    layers.push_back(Layer::dense(in, width));
    in = width;
  }
  layers.push_back(Layer::dense(in, classes, Activation::softmax));
  Network net({h, w, c}, std::move(layers));
  init_he(net, seed);
  return net;
}

}  // namespace igprune
