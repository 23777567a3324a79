#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "igprune/error.hpp"
#include "igprune/network.hpp"

namespace igprune {

enum class Split { train, eval };

/// Labelled samples; `inputs` is (N x features) or (N x H x W x C).
struct Dataset {
  Tensor inputs;
  std::vector<std::size_t> labels;
  std::size_t n_classes = 0;
  Split split = Split::train;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t sample_size() const { return labels.empty() ? 0 : inputs.size() / labels.size(); }

  std::vector<std::size_t> sample_shape() const {
    return {inputs.shape().begin() + 1, inputs.shape().end()};
  }

  void validate() const {
    if (inputs.rank() < 2 || inputs.dim(0) != labels.size()) {
      throw DimensionError("dataset: " + std::to_string(labels.size()) + " labels for inputs " +
                           Tensor::shape_string(inputs.shape()));
    }
    for (std::size_t y : labels) {
      if (y >= n_classes) throw IndexError("dataset: label " + std::to_string(y) + " >= n_classes");
    }
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Gathers the given samples into a batch.
inline Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices) {
  const std::size_t width = ds.sample_size();
  std::vector<std::size_t> shape = ds.inputs.shape();
  shape[0] = indices.size();
  Batch b{Tensor(shape), {}};
  b.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= ds.size()) throw IndexError("make_batch: sample " + std::to_string(src) + " out of range");
    std::copy_n(ds.inputs.data() + src * width, width, b.inputs.data() + i * width);
    b.labels.push_back(ds.labels[src]);
  }
  return b;
}

/// The whole dataset as one batch.
inline Batch full_batch(const Dataset& ds) {
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return make_batch(ds, idx);
}

inline Dataset subset(const Dataset& ds, std::span<const std::size_t> indices, Split split) {
  Batch b = make_batch(ds, indices);
  return Dataset{std::move(b.inputs), std::move(b.labels), ds.n_classes, split};
}

/// Random train/eval partition.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double eval_fraction,
                                                 std::uint64_t seed) {
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
    throw ConfigError("eval fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_eval = static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(ds.size())));
  if (n_eval == 0 || n_eval == ds.size()) throw ConfigError("split leaves an empty partition");
  std::vector<std::size_t> eval(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_eval));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_eval), idx.end());
  return {subset(ds, train, Split::train), subset(ds, eval, Split::eval)};
}

/// Isotropic Gaussian clusters around standard-normal centers, class-major order.
inline Dataset gen_blobs(std::size_t n_per_class, std::size_t n_classes, std::size_t dim,
                         double spread, std::uint64_t seed) {
  if (n_per_class == 0 || n_classes == 0 || dim == 0) throw ConfigError("gen_blobs: counts must be positive");
  if (spread < 0.0) throw ConfigError("gen_blobs: spread must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> centers(n_classes * dim);
  for (double& c : centers) c = normal(rng);
  Dataset ds{Tensor({n_per_class * n_classes, dim}), {}, n_classes, Split::train};
  double* out = ds.inputs.data();
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      for (std::size_t d = 0; d < dim; ++d) *out++ = centers[c * dim + d] + spread * normal(rng);
      ds.labels.push_back(c);
    }
  }
  return ds;
}

/// Two interleaved unit half-circles: class 0 on (cos t, sin t), class 1 on
/// (1 - cos t, 0.5 - sin t), t evenly spaced over [0, pi], plus Gaussian noise.
inline Dataset gen_two_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n == 0 || n % 2 != 0) throw ConfigError("gen_two_moons: n must be positive and even");
  if (noise < 0.0) throw ConfigError("gen_two_moons: noise must be non-negative");
  const std::size_t half = n / 2;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset ds{Tensor({n, 2}), {}, 2, Split::train};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i < half ? 0 : 1;
    const std::size_t j = i - cls * half;
    const double t = half == 1 ? 0.0 : std::numbers::pi * static_cast<double>(j) / static_cast<double>(half - 1);
    double x = cls == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double y = cls == 0 ? std::sin(t) : 0.5 - std::sin(t);
    if (noise > 0.0) {
      x += noise * normal(rng);
      y += noise * normal(rng);
    }
    ds.inputs.at(i, 0) = x;
    ds.inputs.at(i, 1) = y;
    ds.labels.push_back(cls);
  }
  return ds;
}

/// Single-channel size x size images with one bright stroke per class:
/// 0 horizontal, 1 vertical, 2 diagonal, 3 anti-diagonal; random offset, Gaussian noise.
inline Dataset gen_stroke_images(std::size_t n_per_class, std::size_t size, double noise,
                                 std::uint64_t seed) {
  constexpr std::size_t kClasses = 4;
  if (n_per_class == 0 || size < 3) throw ConfigError("gen_stroke_images: bad sizes");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> offset(0, size - 1);
  std::uniform_int_distribution<int> shift(-static_cast<int>(size) / 4, static_cast<int>(size) / 4);
  Dataset ds{Tensor({n_per_class * kClasses, size, size, 1}), {}, kClasses, Split::train};
  double* px = ds.inputs.data();
  for (std::size_t c = 0; c < kClasses; ++c) {
    for (std::size_t s = 0; s < n_per_class; ++s) {
      const std::size_t o = offset(rng);
      const int d = shift(rng);
      for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) {
          const auto ii = static_cast<int>(i), jj = static_cast<int>(j), n = static_cast<int>(size);
          bool on = false;
          switch (c) {
            case 0: on = i == o; break;
            case 1: on = j == o; break;
            case 2: on = ii - jj == d; break;
            default: on = ii + jj == n - 1 + d; break;
          }
          *px++ = (on ? 1.0 : 0.0) + noise * normal(rng);
        }
      }
      ds.labels.push_back(c);
    }
  }
  return ds;
}

/// Deterministic epoch-wise shuffled batches; the trailing partial batch of each
/// epoch is dropped. The dataset must outlive the stream.
class BatchStream {
 public:
  BatchStream(const Dataset& ds, std::size_t batch_size, std::uint64_t seed)
      : ds_(&ds), batch_size_(batch_size), rng_(seed) {
    if (batch_size == 0 || batch_size > ds.size()) {
      throw ConfigError("batch size " + std::to_string(batch_size) + " must lie in [1, " +
                        std::to_string(ds.size()) + "]");
    }
    order_.resize(ds.size());
    reshuffle();
  }

  std::vector<std::size_t> next_indices() {
    if (pos_ + batch_size_ > order_.size()) reshuffle();
    std::vector<std::size_t> idx(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(pos_ + batch_size_));
    pos_ += batch_size_;
    return idx;
  }

  Batch next() { return make_batch(*ds_, next_indices()); }

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batches_per_epoch() const noexcept { return order_.size() / batch_size_; }

 private:
  void reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
    ++epoch_;
  }

  const Dataset* ds_;
  std::size_t batch_size_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::size_t epoch_ = 0;
};

/// One row per sample: features..., label.
inline void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f.precision(17);
  const std::size_t width = ds.sample_size();
  for (std::size_t i = 0; i < width; ++i) f << 'x' << i << ',';
  f << "label\n";
  for (std::size_t s = 0; s < ds.size(); ++s) {
    for (std::size_t i = 0; i < width; ++i) f << ds.inputs[s * width + i] << ',';
    f << ds.labels[s] << '\n';
  }
}

}  // namespace igprune
