#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "igprune/criteria.hpp"
#include "igprune/data.hpp"
#include "igprune/error.hpp"
#include "igprune/mask.hpp"
#include "igprune/network.hpp"
#include "igprune/trainer.hpp"

namespace igprune {

// ---------------------------------------------------------------------------
// Layer budgets
// ---------------------------------------------------------------------------

/// How the global target rho is split into per-layer targets rho_l.
///   uniform       rho_l equal across prunable layers (capped, excess redistributed)
///   proportional  rho_l proportional to Omega(W_l)
///   explicit_list user-provided rho_l, validated against the global target
///   balanced      every prunable layer keeps the same fraction of its units;
///                 accounts for the weights a removed unit takes from the next layer
enum class BudgetStrategy { uniform, proportional, explicit_list, balanced };

inline const char* to_string(BudgetStrategy s) {
  switch (s) {
    case BudgetStrategy::uniform: return "uniform";
    case BudgetStrategy::proportional: return "proportional";
    case BudgetStrategy::explicit_list: return "explicit";
    case BudgetStrategy::balanced: return "balanced";
  }
  return "?";
}

inline BudgetStrategy parse_budget_strategy(const std::string& s) {
  for (auto v : {BudgetStrategy::uniform, BudgetStrategy::proportional, BudgetStrategy::explicit_list,
                 BudgetStrategy::balanced}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown budget strategy '" + s + "'");
}

/// Parameter count of one layer and of its smallest removable unit.
struct LayerSize {
  std::size_t omega = 0;
  std::size_t unit_params = 1;
  bool prunable = true;
  /// Most parameters pruning may take from the layer; 0 = omega - unit_params.
  std::size_t removable = 0;
};

namespace detail {

inline void check_rho(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho_global must lie in (0, 1)");
}

/// rho_l = min(cap_l, lambda * weight_l) with lambda chosen so that
/// sum rho_l * Omega_l = target.
inline std::vector<double> water_fill(std::span<const LayerSize> sizes, std::span<const double> weight,
                                      double target) {
  std::vector<double> cap(sizes.size(), 0.0);
  double capacity = 0.0;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    if (!sizes[l].prunable || sizes[l].omega == 0) continue;
    const std::size_t removable =
        sizes[l].removable ? sizes[l].removable : sizes[l].omega - std::min(sizes[l].omega, sizes[l].unit_params);
    cap[l] = static_cast<double>(removable) / static_cast<double>(sizes[l].omega);
    capacity += cap[l] * static_cast<double>(sizes[l].omega);
  }
  if (capacity + 1e-9 < target) {
    throw BudgetError("budget: target removes " + std::to_string(target) + " parameters but prunable layers hold at most " +
                      std::to_string(capacity));
  }
  auto removed = [&](double lambda) {
    double r = 0.0;
    for (std::size_t l = 0; l < sizes.size(); ++l) r += std::min(cap[l], lambda * weight[l]) * static_cast<double>(sizes[l].omega);
    return r;
  };
  double lo = 0.0, hi = 1.0;
  while (removed(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (removed(mid) < target ? lo : hi) = mid;
  }
  std::vector<double> rho(sizes.size());
  for (std::size_t l = 0; l < sizes.size(); ++l) rho[l] = std::min(cap[l], hi * weight[l]);
  return rho;
}

}  // namespace detail

/// Per-layer targets satisfying sum rho_l * Omega(W_l) = rho * Omega(F).
/// Non-prunable layers get 0 (uniform, proportional) and must be 0 in an
/// explicit list. Explicit lists may deviate from the constraint by at most
/// one unit's parameters per layer.
inline std::vector<double> layer_budgets(std::span<const LayerSize> sizes, double rho, BudgetStrategy strategy,
                                         std::span<const double> explicit_rates = {}) {
  detail::check_rho(rho);
  if (sizes.empty()) throw ConfigError("budget: no layers");
  double total = 0.0, slack = 0.0;
  for (const auto& s : sizes) {
    total += static_cast<double>(s.omega);
    if (s.prunable) slack += static_cast<double>(s.unit_params);
  }
  const double target = rho * total;
  switch (strategy) {
    case BudgetStrategy::uniform: {
      std::vector<double> w(sizes.size());
      for (std::size_t l = 0; l < sizes.size(); ++l) w[l] = sizes[l].prunable ? 1.0 : 0.0;
      return detail::water_fill(sizes, w, target);
    }
    case BudgetStrategy::proportional: {
      std::vector<double> w(sizes.size());
      for (std::size_t l = 0; l < sizes.size(); ++l) {
        w[l] = sizes[l].prunable ? static_cast<double>(sizes[l].omega) / total : 0.0;
      }
      return detail::water_fill(sizes, w, target);
    }
    case BudgetStrategy::explicit_list: {
      if (explicit_rates.size() != sizes.size()) {
        throw BudgetError("budget: explicit list has " + std::to_string(explicit_rates.size()) + " entries for " +
                          std::to_string(sizes.size()) + " layers");
      }
      double removed = 0.0;
      for (std::size_t l = 0; l < sizes.size(); ++l) {
        const double r = explicit_rates[l];
        if (!(r >= 0.0 && r < 1.0)) throw BudgetError("budget: explicit rate must lie in [0, 1)");
        if (!sizes[l].prunable && r != 0.0) {
          throw BudgetError("budget: layer " + std::to_string(l) + " is not prunable but has a non-zero rate");
        }
        removed += r * static_cast<double>(sizes[l].omega);
      }
      if (std::abs(removed - target) > slack + 1e-9) {
        throw BudgetError("budget: explicit rates remove " + std::to_string(removed) + " parameters, target is " +
                          std::to_string(target));
      }
      return {explicit_rates.begin(), explicit_rates.end()};
    }
    case BudgetStrategy::balanced:
      throw ConfigError("budget: the balanced strategy needs the network structure");
  }
  throw ConfigError("budget: unknown strategy");
}

/// Layers that may lose units: all of them for weight granularity; all but
/// the output layer for neuron granularity (its units are the classes).
inline bool layer_prunable(const Network& net, std::size_t l, Granularity g) {
  return g == Granularity::weight || l + 1 < net.depth();
}

inline std::vector<LayerSize> layer_sizes(const Network& net, Granularity g) {
  std::vector<LayerSize> out;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const Layer& layer = net.layer(l);
    if (g == Granularity::weight) {
      out.push_back({layer.param_count(), 1, true, layer.weights.size() - 1});
    } else {
      out.push_back({layer.param_count(), layer.fan_in() + 1, layer_prunable(net, l, g), 0});
    }
  }
  return out;
}

namespace detail {

/// Live parameters per layer when layer l keeps `keep[l]` of its units (structured).
inline std::vector<std::size_t> live_params_for_counts(const Network& net, const std::vector<std::size_t>& keep) {
  std::vector<std::size_t> out(net.depth());
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const Layer& layer = net.layer(l);
    const std::size_t in_units = net.input_units(l);
    const std::size_t live_in = l == 0 ? in_units : keep[l - 1];
    const std::size_t rows = layer.fan_in() / in_units * live_in;
    out[l] = rows * keep[l] + keep[l];
  }
  return out;
}

inline std::vector<double> balanced_budgets(const Network& net, double rho) {
  const std::size_t depth = net.depth();
  const double total = static_cast<double>(net.param_count());
  const auto allowed = static_cast<std::size_t>(std::floor((1.0 - rho) * total + 1e-9));
  auto live_total = [&](const std::vector<std::size_t>& keep) {
    std::size_t s = 0;
    for (auto v : live_params_for_counts(net, keep)) s += v;
    return s;
  };
  auto counts_for = [&](double q) {
    std::vector<std::size_t> keep(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      const std::size_t n = net.layer(l).units();
      keep[l] = l + 1 == depth ? n : std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(q * static_cast<double>(n) + 1e-9)), 1, n);
    }
    return keep;
  };
  std::vector<double> candidates{0.0};
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    const std::size_t n = net.layer(l).units();
    for (std::size_t k = 1; k <= n; ++k) candidates.push_back(static_cast<double>(k) / static_cast<double>(n));
  }
  std::sort(candidates.begin(), candidates.end());
  std::optional<std::vector<std::size_t>> best;
  for (double q : candidates) {
    auto keep = counts_for(q);
    if (live_total(keep) <= allowed) best = keep;
  }
  if (!best) throw BudgetError("budget: target unreachable with at least one unit per layer");
  // Add units back one at a time while the target still holds.
  for (bool grown = true; grown;) {
    grown = false;
    std::vector<std::size_t> order;
    for (std::size_t l = 0; l + 1 < depth; ++l) order.push_back(l);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return static_cast<double>((*best)[a]) / static_cast<double>(net.layer(a).units()) <
             static_cast<double>((*best)[b]) / static_cast<double>(net.layer(b).units());
    });
    for (std::size_t l : order) {
      if ((*best)[l] == net.layer(l).units()) continue;
      auto trial = *best;
      ++trial[l];
      if (live_total(trial) <= allowed) {
        best = trial;
        grown = true;
        break;
      }
    }
  }
  const auto live = live_params_for_counts(net, *best);
  std::vector<double> rho_l(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    rho_l[l] = 1.0 - static_cast<double>(live[l]) / static_cast<double>(net.layer(l).param_count());
  }
  return rho_l;
}

}  // namespace detail

inline std::vector<double> layer_budgets(const Network& net, double rho, BudgetStrategy strategy,
                                         Granularity g = Granularity::neuron,
                                         std::span<const double> explicit_rates = {}) {
  detail::check_rho(rho);
  if (strategy == BudgetStrategy::balanced) {
    if (g == Granularity::weight) return layer_budgets(layer_sizes(net, g), rho, BudgetStrategy::uniform);
    return detail::balanced_budgets(net, rho);
  }
  return layer_budgets(layer_sizes(net, g), rho, strategy, explicit_rates);
}

/// Largest live-parameter count of layer l that meets budget rho_l.
inline std::size_t allowed_live_params(const Network& net, std::size_t l, double rho_l) {
  return static_cast<std::size_t>(std::floor((1.0 - rho_l) * static_cast<double>(net.layer(l).param_count()) + 1e-6));
}

// ---------------------------------------------------------------------------
// Unit selection
// ---------------------------------------------------------------------------

/// Argmin over active units; ties go to the lowest index.
inline std::size_t select_unit(std::span<const double> scores, std::span<const std::uint8_t> removed = {}) {
  if (!removed.empty() && removed.size() != scores.size()) throw DimensionError("select_unit: mask length mismatch");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!removed.empty() && removed[i]) continue;
    if (!best || scores[i] < scores[*best]) best = i;
  }
  if (!best) throw BudgetError("select_unit: every unit is masked");
  return *best;
}

inline std::size_t select_unit(const ScoreVector& sv) {
  if (sv.size() == 0) throw BudgetError("select_unit: every unit is masked");
  return sv.units[select_unit(std::span<const double>(sv.scores))];
}

/// The `count` lowest-scored units, ascending by (score, index).
inline std::vector<std::size_t> select_units(const ScoreVector& sv, std::size_t count) {
  std::vector<std::size_t> order(sv.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  count = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return sv.scores[a] < sv.scores[b] || (sv.scores[a] == sv.scores[b] && a < b);
                    });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(sv.units[order[i]]);
  return out;
}

// ---------------------------------------------------------------------------
// Schedule, events, report
// ---------------------------------------------------------------------------

enum class ScheduleMode { entwined, post_pruning };

inline const char* to_string(ScheduleMode m) { return m == ScheduleMode::entwined ? "entwined" : "post_pruning"; }

inline ScheduleMode parse_schedule_mode(const std::string& s) {
  if (s == "entwined") return ScheduleMode::entwined;
  if (s == "post_pruning" || s == "post-pruning") return ScheduleMode::post_pruning;
  throw ConfigError("unknown schedule mode '" + s + "'");
}

struct PruneSchedule {
  double rho_global = 0.5;
  BudgetStrategy strategy = BudgetStrategy::balanced;
  std::vector<double> explicit_budgets;
  /// O: fine-tune steps after each removal.
  std::size_t finetune_steps = 0;
  /// When set, overrides O: this many steps in total, spread evenly over the
  /// removals (entwined) or run once after pruning (post_pruning).
  std::optional<std::size_t> finetune_budget;
  ScheduleMode mode = ScheduleMode::entwined;
  CriterionSpec criterion;
  TrainConfig train;
  /// Samples in the batch drawn for each scoring pass.
  std::size_t scoring_batch = 64;
  /// Weights removed per scoring pass in weight granularity; 0 = max(1, Omega(W_l) / 1000).
  std::size_t group_size = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const {
    detail::check_rho(rho_global);
    criterion.validate();
    train.validate();
    if (scoring_batch == 0) throw ConfigError("scoring_batch must be >= 1");
  }
};

struct RemovalEvent {
  std::size_t step = 0;
  std::size_t layer = 0;
  /// Neuron index, or flat weight indices in weight granularity.
  std::vector<std::size_t> units;
  double score = 0.0;
  std::size_t finetune_steps = 0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  std::size_t params_remaining = 0;
  std::size_t flops_remaining = 0;
};

struct PruneReport {
  PruneSchedule schedule;
  std::vector<double> budgets;
  std::vector<RemovalEvent> events;
  std::vector<std::size_t> evaluations;  // scoring passes per layer
  std::vector<std::size_t> removals;     // removal events per layer
  std::vector<double> finetune_losses;
  std::size_t params_before = 0;
  std::size_t params_after = 0;
  std::size_t flops_before = 0;
  std::size_t flops_after = 0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  bool aborted = false;
  std::string abort_reason;

  double params_removed_pct() const {
    return 100.0 * (1.0 - static_cast<double>(params_after) / static_cast<double>(params_before));
  }
  double flops_removed_pct() const {
    return 100.0 * (1.0 - static_cast<double>(flops_after) / static_cast<double>(flops_before));
  }
};

struct PruneResult {
  Network net;
  PruneMask mask;
  PruneReport report;
};

/// Removal events each layer will take to meet its budget (structured counts
/// do not depend on which units are picked).
inline std::vector<std::size_t> planned_removals(const Network& net, const PruneMask& start,
                                                 std::span<const double> budgets, Granularity g,
                                                 std::size_t group_size) {
  PruneMask mask = start;
  std::vector<std::size_t> out(net.depth(), 0);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    if (!layer_prunable(net, l, g)) continue;
    const std::size_t allowed = allowed_live_params(net, l, budgets[l]);
    if (g == Granularity::weight) {
      const std::size_t live = count_layer_params(net, mask, l);
      const std::size_t group = group_size ? group_size : std::max<std::size_t>(1, net.layer(l).param_count() / 1000);
      if (live > allowed) out[l] = (live - allowed + group - 1) / group;
      continue;
    }
    for (std::size_t n = 0; count_layer_params(net, mask, l) > allowed; ++n) {
      if (n >= net.layer(l).units() || mask.active_neurons(l) <= 1) {
        throw BudgetError("budget for layer " + std::to_string(l) + " is unreachable");
      }
      if (mask.neuron_removed(l, n)) continue;
      mask.remove_neuron(l, n);
      ++out[l];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pruner
// ---------------------------------------------------------------------------

/// Sequential layer-by-layer pruning with rescoring after every removal.
///
/// The network is scored on a fresh batch for every removal; the argmin unit
/// is masked and zeroed, then (entwined mode) the whole network is fine-tuned
/// for the scheduled number of steps with masked weights held at zero.
class Pruner {
 public:
  using StepHook = std::function<void(const Network&, const PruneMask&)>;

  Pruner(Network net, PruneSchedule schedule, const Dataset& train, const Dataset* eval = nullptr,
         std::optional<PruneMask> initial = std::nullopt)
      : net_(std::move(net)),
        mask_(initial ? std::move(*initial) : PruneMask(net_)),
        schedule_(std::move(schedule)),
        train_(train),
        eval_(eval),
        tuner_(train, schedule_.train),
        scoring_(train, std::min(schedule_.scoring_batch, train.size()), schedule_.seed ^ 0x5c0e5eedULL) {
    schedule_.validate();
    mask_.check_congruent(net_);
    apply_mask(net_, mask_);
    report_.schedule = schedule_;
    report_.evaluations.assign(net_.depth(), 0);
    report_.removals.assign(net_.depth(), 0);
    report_.params_before = count_params(net_);
    report_.flops_before = count_flops(net_);
    reference_loss_ = std::max(dataset_loss(net_, train_), std::log(static_cast<double>(std::max<std::size_t>(2, train_.n_classes))));
  }

  /// Called after every fine-tune step.
  void set_step_hook(StepHook hook) { hook_ = std::move(hook); }

  const Network& network() const noexcept { return net_; }
  const PruneMask& mask() const noexcept { return mask_; }
  const PruneReport& report() const noexcept { return report_; }

  /// Fine-tune steps to run after removal number `index` (0-based, over the whole run).
  void set_step_plan(std::vector<std::size_t> plan) { plan_ = std::move(plan); }

  /// Removes units from layer l until its live parameters meet rho_l.
  void prune_layer(std::size_t l, double rho_l) {
    net_.check_layer(l);
    const Granularity g = schedule_.criterion.granularity;
    if (!layer_prunable(net_, l, g)) return;
    const std::size_t allowed = allowed_live_params(net_, l, rho_l);
    const std::size_t group =
        schedule_.group_size ? schedule_.group_size : std::max<std::size_t>(1, net_.layer(l).param_count() / 1000);
    while (count_layer_params(net_, mask_, l) > allowed) {
      if (g == Granularity::neuron && mask_.active_neurons(l) <= 1) {
        throw BudgetError("budget for layer " + std::to_string(l) + " is unreachable: one unit left");
      }
      const Batch batch = scoring_.next();
      ScoreOptions opt;
      opt.mask = &mask_;
      opt.workers = schedule_.workers;
      const ScoreVector sv = score(net_, batch, l, schedule_.criterion, opt);
      ++report_.evaluations[l];
      if (sv.size() == 0) throw BudgetError("budget for layer " + std::to_string(l) + " is unreachable: no live weights");

      RemovalEvent ev;
      ev.step = report_.events.size();
      ev.layer = l;
      if (g == Granularity::neuron) {
        const std::size_t n = select_unit(sv);
        ev.units = {n};
        ev.score = sv.of(n);
        mask_.remove_neuron(l, n);
      } else {
        ev.units = select_units(sv, group);
        ev.score = sv.of(ev.units.front());
        for (std::size_t i : ev.units) mask_.remove_weight(l, i);
      }
      apply_mask(net_, mask_);
      ++report_.removals[l];

      if (schedule_.mode == ScheduleMode::entwined) {
        ev.finetune_steps = steps_after(ev.step);
        run_finetune(ev.finetune_steps);
      }
      ev.params_remaining = count_params(net_, mask_);
      ev.flops_remaining = count_flops(net_, mask_);
      if (eval_) ev.accuracy = evaluate(net_, *eval_);
      report_.events.push_back(std::move(ev));
    }
  }

  /// Fine-tunes the whole network for `steps` SGD steps under the current mask.
  void run_finetune(std::size_t steps) {
    for (std::size_t s = 0; s < steps; ++s) {
      const double l = tuner_step();
      report_.finetune_losses.push_back(l);
      if (!std::isfinite(l)) throw NumericError("fine-tune loss is not finite");
      if (l > 10.0 * reference_loss_) {
        if (lr_halved_) throw NumericError("fine-tune loss diverged twice");
        lr_halved_ = true;
        tuner_.optimizer().set_learning_rate(0.5 * tuner_.optimizer().learning_rate());
      }
      if (hook_) hook_(net_, mask_);
    }
  }

  /// Runs the full schedule; divergence ends the run early with `aborted` set.
  PruneResult run() {
    const Granularity g = schedule_.criterion.granularity;
    report_.budgets = layer_budgets(net_, schedule_.rho_global, schedule_.strategy, g, schedule_.explicit_budgets);
    try {
      if (schedule_.finetune_budget && schedule_.mode == ScheduleMode::entwined) {
        const auto per_layer = planned_removals(net_, mask_, report_.budgets, g, schedule_.group_size);
        std::size_t total = 0;
        for (auto v : per_layer) total += v;
        std::vector<std::size_t> plan(total, 0);
        for (std::size_t i = 0; i < total; ++i) {
          plan[i] = *schedule_.finetune_budget / total + (i < *schedule_.finetune_budget % total ? 1 : 0);
        }
        plan_ = std::move(plan);
      }
      for (std::size_t l = 0; l < net_.depth(); ++l) prune_layer(l, report_.budgets[l]);
      if (schedule_.mode == ScheduleMode::post_pruning) {
        run_finetune(schedule_.finetune_budget ? *schedule_.finetune_budget
                                               : schedule_.finetune_steps * report_.events.size());
      }
    } catch (const NumericError& e) {
      report_.aborted = true;
      report_.abort_reason = e.what();
    }
    return finish();
  }

  PruneResult finish() {
    report_.params_after = count_params(net_, mask_);
    report_.flops_after = count_flops(net_, mask_);
    if (eval_) report_.accuracy = evaluate(net_, *eval_);
    return {net_, mask_, report_};
  }

 private:
  std::size_t steps_after(std::size_t index) const {
    if (!plan_.empty()) return index < plan_.size() ? plan_[index] : 0;
    return schedule_.finetune_steps;
  }

  double tuner_step() {
    const auto losses = tuner_.run(net_, 1, &mask_);
    return losses.front();
  }

  Network net_;
  PruneMask mask_;
  PruneSchedule schedule_;
  const Dataset& train_;
  const Dataset* eval_;
  FineTuner tuner_;
  BatchStream scoring_;
  PruneReport report_;
  std::vector<std::size_t> plan_;
  StepHook hook_;
  double reference_loss_ = 0.0;
  bool lr_halved_ = false;
};

/// Algorithm entry point: prunes layers 0..L-1 in order.
inline PruneResult prune_network(const Network& net, const PruneSchedule& schedule, const Dataset& train,
                                 const Dataset* eval = nullptr) {
  Pruner p(net, schedule, train, eval);
  return p.run();
}

/// Physically removes masked neurons (and the matching input rows/channels of
/// the following layer). Output-layer units are kept so logits keep their width.
inline Network apply_mask_permanently(const Network& net, const PruneMask& mask) {
  mask.check_congruent(net);
  if (!mask.structured()) throw ConfigError("apply_mask_permanently: unstructured masks cannot be compacted");
  const std::size_t depth = net.depth();
  std::vector<std::vector<std::size_t>> keep(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    for (std::size_t n = 0; n < net.layer(l).units(); ++n) {
      if (l + 1 == depth || !mask.neuron_removed(l, n)) keep[l].push_back(n);
    }
    if (keep[l].empty()) throw BudgetError("apply_mask_permanently: layer " + std::to_string(l) + " has no units left");
  }
  std::vector<Layer> layers;
  for (std::size_t l = 0; l < depth; ++l) {
    const Layer& src = net.layer(l);
    const std::size_t in_units = net.input_units(l);
    std::vector<std::uint8_t> in_alive(in_units, 1);
    if (l > 0) {
      for (std::size_t u = 0; u < in_units; ++u) in_alive[u] = !mask.neuron_removed(l - 1, u);
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < src.fan_in(); ++r) {
      if (in_alive[r % in_units]) rows.push_back(r);
    }
    const std::size_t live_in = l == 0 ? in_units : keep[l - 1].size();
    Layer dst = src.kind == LayerKind::dense
                    ? Layer::dense(rows.size(), keep[l].size(), src.activation)
                    : Layer::conv2d(src.in_h, src.in_w, live_in, keep[l].size(), src.kernel(), src.activation);
    const std::size_t units = src.units(), new_units = keep[l].size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < new_units; ++c) {
        const std::size_t n = keep[l][c];
        dst.weights[r * new_units + c] = mask.neuron_removed(l, n) ? 0.0 : src.weights[rows[r] * units + n];
      }
    }
    for (std::size_t c = 0; c < new_units; ++c) {
      dst.bias[c] = mask.neuron_removed(l, keep[l][c]) ? 0.0 : src.bias[keep[l][c]];
    }
    layers.push_back(std::move(dst));
  }
  std::vector<std::size_t> input_shape = net.input_shape();
  return Network(std::move(input_shape), std::move(layers));
}

}  // namespace igprune
