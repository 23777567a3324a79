#pragma once

// Neuron and weight importance criteria.
//
//   Lp          ||W^n||_p
//   GradP       ||dL/dW^n||_p
//   LpTimesGradP  ||W^n||_p * ||dL/dW^n||_p
//   SGp         sum_s ||dL/dW^n evaluated at mu^s W^n||_p
//   IGp         sum_s ||mu^s W^n||_p * ||dL/dW^n evaluated at mu^s W^n||_p
//
// with s = 0..S, S = ceil(ln(stop_epsilon) / ln(mu)). Only the scored unit is
// decayed along the path; the rest of the network keeps its current values and
// the same batch is used for every s and every unit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "igprune/error.hpp"
#include "igprune/mask.hpp"
#include "igprune/network.hpp"

namespace igprune {

enum class CriterionKind { Lp, GradP, LpTimesGradP, SGp, IGp };
enum class Granularity { neuron, weight };

struct CriterionSpec {
  CriterionKind kind = CriterionKind::IGp;
  int p = 2;
  double mu = 0.9;
  double stop_epsilon = 0.01;
  Granularity granularity = Granularity::neuron;

  void validate() const {
    if (p != 1 && p != 2) throw ConfigError("criterion: p must be 1 or 2");
    if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("criterion: mu must lie in (0, 1)");
    if (!(stop_epsilon > 0.0 && stop_epsilon < 1.0)) {
      throw ConfigError("criterion: stop_epsilon must lie in (0, 1)");
    }
  }

  /// Index S of the last path point.
  std::size_t path_steps() const {
    validate();
    return static_cast<std::size_t>(std::ceil(std::log(stop_epsilon) / std::log(mu)));
  }

  bool uses_path() const { return kind == CriterionKind::SGp || kind == CriterionKind::IGp; }
};

/// "L2", "grad2", "L2xgrad2", "SG2", "IG2" (and the p = 1 forms).
inline std::string criterion_name(CriterionKind kind, int p) {
  const std::string ps = std::to_string(p);
  switch (kind) {
    case CriterionKind::Lp: return "L" + ps;
    case CriterionKind::GradP: return "grad" + ps;
    case CriterionKind::LpTimesGradP: return "L" + ps + "xgrad" + ps;
    case CriterionKind::SGp: return "SG" + ps;
    case CriterionKind::IGp: return "IG" + ps;
  }
  return "?";
}

inline std::string criterion_name(const CriterionSpec& s) { return criterion_name(s.kind, s.p); }

inline CriterionSpec parse_criterion(const std::string& name) {
  for (int p : {1, 2}) {
    for (auto k : {CriterionKind::Lp, CriterionKind::GradP, CriterionKind::LpTimesGradP,
                   CriterionKind::SGp, CriterionKind::IGp}) {
      if (criterion_name(k, p) == name) {
        CriterionSpec s;
        s.kind = k;
        s.p = p;
        return s;
      }
    }
  }
  throw ConfigError("unknown criterion '" + name + "'");
}

/// Scores of the active units of one layer; `units[i]` is the neuron index
/// (neuron granularity) or flat weight index (weight granularity) of `scores[i]`.
struct ScoreVector {
  std::size_t layer_index = 0;
  Granularity granularity = Granularity::neuron;
  std::vector<std::size_t> units;
  std::vector<double> scores;

  std::size_t size() const noexcept { return scores.size(); }

  /// Score of a given unit index.
  double of(std::size_t unit) const {
    const auto it = std::lower_bound(units.begin(), units.end(), unit);
    if (it == units.end() || *it != unit) throw IndexError("score: unit " + std::to_string(unit) + " not scored");
    return scores[static_cast<std::size_t>(it - units.begin())];
  }
};

struct TrajectoryPoint {
  double magnitude = 0.0;
  double grad_norm = 0.0;
};

/// Path visited by the integrated criteria for one neuron, s = 0..S.
struct TrajectoryRecord {
  std::size_t layer_index = 0;
  std::size_t neuron_index = 0;
  std::vector<TrajectoryPoint> points;
};

template <typename Range>
double p_norm(const Range& values, int p) {
  double acc = 0.0;
  if (p == 1) {
    for (double v : values) acc += std::abs(v);
    return acc;
  }
  for (double v : values) acc += v * v;
  return std::sqrt(acc);
}

/// Weight column W^n of a layer weight tensor (units = last dimension).
inline std::vector<double> neuron_column(const Tensor& weights, std::size_t n) {
  const std::size_t units = weights.shape().back();
  std::vector<double> col;
  col.reserve(weights.size() / units);
  for (std::size_t i = n; i < weights.size(); i += units) col.push_back(weights[i]);
  return col;
}

/// Path scale factors mu^0 .. mu^S by repeated multiplication.
inline std::vector<double> path_scales(const CriterionSpec& spec) {
  const std::size_t steps = spec.path_steps();
  std::vector<double> t(steps + 1);
  t[0] = 1.0;
  for (std::size_t s = 1; s <= steps; ++s) t[s] = t[s - 1] * spec.mu;
  return t;
}

/// Active units of layer l at the requested granularity (all units when mask is null).
inline std::vector<std::size_t> active_units(const Network& net, std::size_t l, Granularity g,
                                             const PruneMask* mask) {
  const Layer& layer = net.layer(l);
  std::vector<std::size_t> out;
  if (g == Granularity::neuron) {
    for (std::size_t n = 0; n < layer.units(); ++n) {
      if (!mask || !mask->neuron_removed(l, n)) out.push_back(n);
    }
  } else {
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      if (!mask || weight_live(net, *mask, l, i)) out.push_back(i);
    }
  }
  return out;
}

/// Magnitude criterion: one score per neuron, independent of data.
inline ScoreVector criterion_lp(const Tensor& weights, int p) {
  if (p != 1 && p != 2) throw ConfigError("criterion: p must be 1 or 2");
  if (weights.rank() < 2) throw DimensionError("criterion_lp: weights must have rank >= 2");
  ScoreVector sv;
  const std::size_t units = weights.shape().back();
  for (std::size_t n = 0; n < units; ++n) {
    sv.units.push_back(n);
    sv.scores.push_back(p_norm(neuron_column(weights, n), p));
  }
  return sv;
}

namespace detail {

inline void check_batch(const Batch& batch) {
  if (batch.size() == 0) throw ConfigError("criterion: empty batch");
}

inline ScoreVector restrict_to(ScoreVector all, const std::vector<std::size_t>& units) {
  ScoreVector out;
  out.layer_index = all.layer_index;
  out.granularity = all.granularity;
  out.units = units;
  for (std::size_t u : units) out.scores.push_back(all.scores[u]);
  return out;
}

}  // namespace detail

inline ScoreVector criterion_lp(const Network& net, std::size_t l, int p, const PruneMask* mask = nullptr) {
  ScoreVector sv = criterion_lp(net.layer(l).weights, p);
  sv.layer_index = l;
  return detail::restrict_to(std::move(sv), active_units(net, l, Granularity::neuron, mask));
}

/// Gradient-norm criterion from one backward pass at the current weights.
inline ScoreVector criterion_grad(const Network& net, const Batch& batch, std::size_t l, int p,
                                  const PruneMask* mask = nullptr) {
  detail::check_batch(batch);
  net.check_layer(l);
  const GradientSet g = backward(net, batch);
  ScoreVector sv = criterion_lp(g.weights[l], p);
  sv.layer_index = l;
  return detail::restrict_to(std::move(sv), active_units(net, l, Granularity::neuron, mask));
}

/// Magnitude x gradient-norm criterion, the elementwise product of the two above.
inline ScoreVector criterion_mag_grad(const Network& net, const Batch& batch, std::size_t l, int p,
                                      const PruneMask* mask = nullptr) {
  const ScoreVector mag = criterion_lp(net, l, p, mask);
  ScoreVector sv = criterion_grad(net, batch, l, p, mask);
  for (std::size_t i = 0; i < sv.size(); ++i) sv.scores[i] *= mag.scores[i];
  return sv;
}

/// Gradient norms of one neuron's weight column while that neuron alone is
/// scaled by each factor in `scales`.
///
/// Scaling a neuron's weights and bias by t > 0 scales its pre-activation and,
/// for relu/identity, its output by exactly t. Everything upstream is shared,
/// so one forward trace of the batch is reused and only the layers above the
/// scored one are re-run, for all scales at once as a stacked batch.
class PathEvaluator {
 public:
  PathEvaluator(const Network& net, const Batch& batch, std::size_t layer)
      : net_(net), layer_(net.check_layer(layer)), labels_(batch.labels) {
    detail::check_batch(batch);
    base_ = forward_trace(net, as_matrix(net, batch.inputs));
    detail::check_labels(labels_, batch.size(), net.output_dim());
    const Layer& cur = net.layer(layer_);
    patches_ = cur.kind == LayerKind::conv2d ? detail::im2col(cur, base_.inputs[layer_]) : base_.inputs[layer_];
    post_ = detail::activate(cur.activation, base_.pre[layer_]);
  }

  std::vector<double> grad_norms(std::size_t neuron, std::span<const double> scales, int p) const {
    net_.check_neuron(layer_, neuron);
    for (double t : scales) {
      if (!(t > 0.0 && t <= 1.0)) throw ConfigError("path scales must lie in (0, 1]");
    }
    const Layer& cur = net_.layer(layer_);
    const auto groups = static_cast<Eigen::Index>(scales.size());
    const auto batch = static_cast<Eigen::Index>(labels_.size());
    const auto positions = static_cast<Eigen::Index>(cur.positions());
    const auto units = static_cast<Eigen::Index>(cur.units());
    const Eigen::Index rows = groups * batch;

    std::vector<std::size_t> stacked_labels;
    stacked_labels.reserve(static_cast<std::size_t>(rows));
    for (Eigen::Index g = 0; g < groups; ++g) stacked_labels.insert(stacked_labels.end(), labels_.begin(), labels_.end());
    const double inv_batch = 1.0 / static_cast<double>(batch);

    // Output columns of the scored neuron: one per spatial position.
    Eigen::VectorXi cols(positions);
    for (Eigen::Index q = 0; q < positions; ++q) cols(q) = static_cast<int>(q * units + static_cast<Eigen::Index>(neuron));

    Matrix post_cols(batch, positions);
    Matrix pre_cols(batch, positions);
    for (Eigen::Index q = 0; q < positions; ++q) {
      post_cols.col(q) = post_.col(cols(q));
      pre_cols.col(q) = base_.pre[layer_].col(cols(q));
    }

    Matrix dcols(rows, positions);  // dL/d(output of the scored neuron), stacked
    if (layer_ + 1 == net_.depth()) {
      Matrix logits(rows, base_.logits.cols());
      for (Eigen::Index g = 0; g < groups; ++g) {
        auto block = logits.middleRows(g * batch, batch);
        block = base_.logits;
        block.col(cols(0)) *= scales[static_cast<std::size_t>(g)];
      }
      Matrix dlogits;
      detail::cross_entropy(logits, stacked_labels, &dlogits, inv_batch);
      dcols = dlogits.col(cols(0));
    } else {
      const Layer& next = net_.layer(layer_ + 1);
      Matrix z_next(rows, static_cast<Eigen::Index>(next.output_size()));
      Matrix stacked_in;
      if (next.kind == LayerKind::dense) {
        Matrix w_rows(positions, next.weight_matrix().cols());
        for (Eigen::Index q = 0; q < positions; ++q) w_rows.row(q) = next.weight_matrix().row(cols(q));
        const Matrix delta = post_cols * w_rows;
        for (Eigen::Index g = 0; g < groups; ++g) {
          z_next.middleRows(g * batch, batch) =
              base_.pre[layer_ + 1] + (scales[static_cast<std::size_t>(g)] - 1.0) * delta;
        }
        Matrix a_next = detail::activate(next.activation, z_next);
        Matrix da_next = downstream(std::move(a_next), stacked_labels, inv_batch);
        const Matrix dz_next = detail::activation_backward(next.activation, z_next, da_next);
        dcols = dz_next * w_rows.transpose();
      } else {
        stacked_in.resize(rows, post_.cols());
        for (Eigen::Index g = 0; g < groups; ++g) {
          auto block = stacked_in.middleRows(g * batch, batch);
          block = post_;
          for (Eigen::Index q = 0; q < positions; ++q) block.col(cols(q)) *= scales[static_cast<std::size_t>(g)];
        }
        z_next = detail::linear(next, stacked_in);
        Matrix a_next = detail::activate(next.activation, z_next);
        Matrix da_next = downstream(std::move(a_next), stacked_labels, inv_batch);
        const Matrix dz_next = detail::activation_backward(next.activation, z_next, da_next);
        const Matrix dx = detail::linear_backward(next, stacked_in, dz_next, nullptr, nullptr, true);
        for (Eigen::Index q = 0; q < positions; ++q) dcols.col(q) = dx.col(cols(q));
      }
    }

    // Through the scored neuron's own activation; sign(t z) = sign(z) for t > 0.
    if (cur.activation == Activation::relu) {
      for (Eigen::Index g = 0; g < groups; ++g) {
        auto block = dcols.middleRows(g * batch, batch);
        block = (pre_cols.array() > 0.0).select(block, 0.0);
      }
    }

    // Rows of `dz` group-major over (sample, position) line up with the patch rows.
    ConstMatrixMap dz(dcols.data(), groups, batch * positions);
    const Matrix grads = dz * patches_;
    std::vector<double> norms(scales.size());
    for (Eigen::Index g = 0; g < groups; ++g) {
      const auto row = grads.row(g);
      norms[static_cast<std::size_t>(g)] = p == 1 ? row.cwiseAbs().sum() : row.norm();
    }
    return norms;
  }

  std::size_t layer() const noexcept { return layer_; }

 private:
  /// dL/d(activation of layer_+1) for stacked activations of that layer.
  Matrix downstream(Matrix a_next, const std::vector<std::size_t>& labels, double inv_batch) const {
    Matrix dlogits;
    if (layer_ + 2 >= net_.depth()) {
      detail::cross_entropy(a_next, labels, &dlogits, inv_batch);
      return dlogits;
    }
    const Trace t = forward_trace(net_, std::move(a_next), layer_ + 2);
    detail::cross_entropy(t.logits, labels, &dlogits, inv_batch);
    return backward_trace(net_, t, std::move(dlogits), nullptr, true);
  }

  const Network& net_;
  std::size_t layer_;
  std::vector<std::size_t> labels_;
  Trace base_;
  Matrix patches_;
  Matrix post_;
};

/// Reference route for the path gradients: scale_neuron + full backward pass
/// per point. Slow; used as a cross-check and for tests.
inline std::vector<double> path_grad_norms_reference(Network& net, const Batch& batch, std::size_t l,
                                                     std::size_t neuron, std::span<const double> scales,
                                                     int p) {
  std::vector<double> norms;
  norms.reserve(scales.size());
  for (double t : scales) {
    RestoreToken tok = scale_neuron(net, l, neuron, t);
    const GradientSet g = backward(net, batch);
    norms.push_back(p_norm(neuron_column(g.weights[l], neuron), p));
    tok.restore();
  }
  return norms;
}

/// Path gradients of a single scalar weight (unstructured granularity).
inline std::vector<double> path_grad_norms_weight(Network& net, const Batch& batch, std::size_t l,
                                                  std::size_t flat_index, std::span<const double> scales) {
  std::vector<double> norms;
  norms.reserve(scales.size());
  for (double t : scales) {
    RestoreToken tok = scale_weight(net, l, flat_index, t);
    const GradientSet g = backward(net, batch);
    norms.push_back(std::abs(g.weights[l][flat_index]));
    tok.restore();
  }
  return norms;
}

namespace detail {

inline double integrate_path(CriterionKind kind, double magnitude, std::span<const double> scales,
                             std::span<const double> grad_norms) {
  double acc = 0.0;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    acc += kind == CriterionKind::IGp ? scales[s] * magnitude * grad_norms[s] : grad_norms[s];
  }
  return acc;
}

inline void check_path_spec(const CriterionSpec& spec, CriterionKind expect) {
  spec.validate();
  if (spec.kind != expect) throw ConfigError("criterion: spec kind does not match the requested criterion");
}

inline ScoreVector path_scores(const Network& net, const Batch& batch, std::size_t l, const CriterionSpec& spec,
                               const PruneMask* mask, std::size_t workers) {
  const std::vector<double> scales = path_scales(spec);
  ScoreVector sv;
  sv.layer_index = l;
  sv.units = active_units(net, l, Granularity::neuron, mask);
  sv.scores.assign(sv.units.size(), 0.0);

  auto run = [&](const Network& model, std::size_t begin, std::size_t end) {
    const PathEvaluator eval(model, batch, l);
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t n = sv.units[i];
      const double magnitude = p_norm(neuron_column(model.layer(l).weights, n), spec.p);
      if (spec.kind == CriterionKind::IGp && magnitude == 0.0) continue;
      const auto norms = eval.grad_norms(n, scales, spec.p);
      sv.scores[i] = integrate_path(spec.kind, magnitude, scales, norms);
    }
  };

  workers = std::max<std::size_t>(1, std::min(workers, sv.units.size()));
  if (workers == 1) {
    run(net, 0, sv.units.size());
    return sv;
  }
  // Copy-per-worker: each thread owns a deep copy of the network.
  std::vector<Network> copies(workers, net);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (sv.units.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(sv.units.size(), w * chunk);
    const std::size_t end = std::min(sv.units.size(), begin + chunk);
    threads.emplace_back([&, w, begin, end] {
      try {
        run(copies[w], begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return sv;
}

}  // namespace detail

/// Integrated magnitude x gradient criterion.
inline ScoreVector criterion_ig(const Network& net, const Batch& batch, std::size_t l, const CriterionSpec& spec,
                                const PruneMask* mask = nullptr, std::size_t workers = 1) {
  detail::check_path_spec(spec, CriterionKind::IGp);
  return detail::path_scores(net, batch, l, spec, mask, workers);
}

/// Sum-of-gradient-norms criterion along the same path.
inline ScoreVector criterion_sg(const Network& net, const Batch& batch, std::size_t l, const CriterionSpec& spec,
                                const PruneMask* mask = nullptr, std::size_t workers = 1) {
  detail::check_path_spec(spec, CriterionKind::SGp);
  return detail::path_scores(net, batch, l, spec, mask, workers);
}

/// Reference implementation of criterion_ig / criterion_sg through
/// scale_neuron and full backward passes.
inline ScoreVector criterion_path_reference(Network& net, const Batch& batch, std::size_t l,
                                            const CriterionSpec& spec, const PruneMask* mask = nullptr) {
  spec.validate();
  if (!spec.uses_path()) throw ConfigError("criterion_path_reference: kind must be IGp or SGp");
  const std::vector<double> scales = path_scales(spec);
  ScoreVector sv;
  sv.layer_index = l;
  sv.units = active_units(net, l, Granularity::neuron, mask);
  for (std::size_t n : sv.units) {
    const double magnitude = p_norm(neuron_column(net.layer(l).weights, n), spec.p);
    const auto norms = path_grad_norms_reference(net, batch, l, n, scales, spec.p);
    sv.scores.push_back(detail::integrate_path(spec.kind, magnitude, scales, norms));
  }
  return sv;
}

/// Quadrature of the path on [0, 1]: point s < S stands for the interval
/// [mu^(s+1), mu^s] of width mu^s (1 - mu), and the last point covers
/// [0, mu^S]. The weights sum to 1. SG yields an estimate of the unweighted
/// path integral of the gradient norm, IG the magnitude times that integral.
inline double rescaled_path_sum(const CriterionSpec& spec, double magnitude, std::span<const double> scales,
                                std::span<const double> grad_norms) {
  if (scales.size() != grad_norms.size() || scales.empty()) {
    throw DimensionError("rescaled_path_sum: length mismatch");
  }
  const double factor = spec.kind == CriterionKind::IGp ? magnitude : 1.0;
  double acc = 0.0;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double width = s + 1 == scales.size() ? scales[s] : scales[s] * (1.0 - spec.mu);
    acc += width * factor * grad_norms[s];
  }
  return acc;
}

/// Trapezoid estimate of the path integral over a uniform grid of n_points
/// intervals in t in [0, 1]: integrand ||grad at t W^n||_p, or
/// ||t W^n||_p * ||grad at t W^n||_p when `weighted`.
inline double integral_oracle(Network& net, const Batch& batch, std::size_t l, std::size_t neuron, int p,
                              std::size_t n_points, bool weighted = false) {
  if (n_points < 100) throw ConfigError("integral_oracle: n_points must be >= 100");
  if (p != 1 && p != 2) throw ConfigError("integral_oracle: p must be 1 or 2");
  detail::check_batch(batch);
  std::vector<double> grid(n_points + 1);
  for (std::size_t i = 0; i <= n_points; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(n_points);
  const auto norms = path_grad_norms_reference(net, batch, l, neuron, grid, p);
  const double magnitude = p_norm(neuron_column(net.layer(l).weights, neuron), p);
  const double h = 1.0 / static_cast<double>(n_points);
  double acc = 0.0;
  for (std::size_t i = 0; i <= n_points; ++i) {
    const double f = weighted ? grid[i] * magnitude * norms[i] : norms[i];
    acc += (i == 0 || i == n_points) ? 0.5 * f : f;
  }
  return acc * h;
}

/// (magnitude, gradient norm) pairs along the decay path of one neuron.
inline TrajectoryRecord trajectory_log(const Network& net, const Batch& batch, std::size_t l, std::size_t neuron,
                                       const CriterionSpec& spec) {
  spec.validate();
  const std::vector<double> scales = path_scales(spec);
  const PathEvaluator eval(net, batch, l);
  const auto norms = eval.grad_norms(neuron, scales, spec.p);
  const double magnitude = p_norm(neuron_column(net.layer(l).weights, neuron), spec.p);
  TrajectoryRecord rec{l, neuron, {}};
  for (std::size_t s = 0; s < scales.size(); ++s) rec.points.push_back({scales[s] * magnitude, norms[s]});
  return rec;
}

struct ScoreOptions {
  const PruneMask* mask = nullptr;
  /// Copy-per-worker threads for the path criteria (1 = sequential).
  std::size_t workers = 1;
};

/// Scores the active units of layer l under any criterion and granularity.
/// In weight granularity every scalar weight is its own unit and all norms
/// reduce to absolute values.
inline ScoreVector score(Network& net, const Batch& batch, std::size_t l, const CriterionSpec& spec,
                         const ScoreOptions& opt = {}) {
  spec.validate();
  net.check_layer(l);
  if (opt.mask) opt.mask->check_congruent(net);
  if (spec.granularity == Granularity::neuron) {
    switch (spec.kind) {
      case CriterionKind::Lp: return criterion_lp(net, l, spec.p, opt.mask);
      case CriterionKind::GradP: return criterion_grad(net, batch, l, spec.p, opt.mask);
      case CriterionKind::LpTimesGradP: return criterion_mag_grad(net, batch, l, spec.p, opt.mask);
      case CriterionKind::SGp: return criterion_sg(net, batch, l, spec, opt.mask, opt.workers);
      case CriterionKind::IGp: return criterion_ig(net, batch, l, spec, opt.mask, opt.workers);
    }
    throw ConfigError("score: unknown criterion kind");
  }

  ScoreVector sv;
  sv.layer_index = l;
  sv.granularity = Granularity::weight;
  sv.units = active_units(net, l, Granularity::weight, opt.mask);
  const Tensor& w = net.layer(l).weights;
  switch (spec.kind) {
    case CriterionKind::Lp:
      for (std::size_t i : sv.units) sv.scores.push_back(std::abs(w[i]));
      return sv;
    case CriterionKind::GradP:
    case CriterionKind::LpTimesGradP: {
      if (batch.size() == 0) throw ConfigError("criterion: empty batch");
      const GradientSet g = backward(net, batch);
      for (std::size_t i : sv.units) {
        const double gi = std::abs(g.weights[l][i]);
        sv.scores.push_back(spec.kind == CriterionKind::GradP ? gi : std::abs(w[i]) * gi);
      }
      return sv;
    }
    case CriterionKind::SGp:
    case CriterionKind::IGp: {
      const std::vector<double> scales = path_scales(spec);
      for (std::size_t i : sv.units) {
        const double magnitude = std::abs(w[i]);
        if (spec.kind == CriterionKind::IGp && magnitude == 0.0) {
          sv.scores.push_back(0.0);
          continue;
        }
        const auto norms = path_grad_norms_weight(net, batch, l, i, scales);
        sv.scores.push_back(detail::integrate_path(spec.kind, magnitude, scales, norms));
      }
      return sv;
    }
  }
  throw ConfigError("score: unknown criterion kind");
}

}  // namespace igprune
