#pragma once

// Experiment harness: benchmark presets, pretraining, and the ablation,
// schedule-comparison, sweep and trajectory runs.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "igprune/checkpoint.hpp"
#include "igprune/criteria.hpp"
#include "igprune/data.hpp"
#include "igprune/idx.hpp"
#include "igprune/pruner.hpp"
#include "igprune/report.hpp"
#include "igprune/trainer.hpp"

namespace igprune {

struct DatasetSpec {
  std::string kind = "blobs";  // blobs | two_moons | strokes | idx
  std::uint64_t seed = 1000;
  double eval_fraction = 0.3;
  std::size_t n_per_class = 250;
  std::size_t n_classes = 8;
  std::size_t dim = 16;
  double spread = 1.0;
  std::size_t n = 1000;
  double noise = 0.1;
  std::size_t size = 8;
  std::string images;
  std::string labels;
};

struct ArchitectureSpec {
  std::string kind = "mlp";  // mlp | convnet
  std::vector<std::size_t> widths;
  std::vector<ConvSpec> convs;
  std::vector<std::size_t> dense;
};

struct PretrainSpec {
  std::size_t steps = 2000;
  TrainConfig train;
};

struct TrajectorySpec {
  std::size_t layer = 0;
  /// Empty: every neuron of the layer.
  std::vector<std::size_t> neurons;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string benchmark;
  DatasetSpec dataset;
  ArchitectureSpec architecture;
  PretrainSpec pretrain;
  /// Template for every pruning run; criterion, rho and budgets are set per cell.
  PruneSchedule schedule;
  std::vector<std::string> criteria;
  std::vector<double> targets;
  std::vector<std::size_t> budgets;
  std::vector<std::uint64_t> seeds{0};
  TrajectorySpec trajectory;
  std::string output = "results";
  /// Optional pretrained checkpoint shared by every seed.
  std::string checkpoint;

  void validate() const {
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    const auto& d = dataset;
    if (d.kind != "blobs" && d.kind != "two_moons" && d.kind != "strokes" && d.kind != "idx") {
      throw ConfigError("dataset.kind must be blobs, two_moons, strokes or idx");
    }
    if (!(d.eval_fraction > 0.0 && d.eval_fraction < 1.0)) throw ConfigError("dataset.eval_fraction must lie in (0, 1)");
    if (d.kind == "idx" && (d.images.empty() || d.labels.empty())) {
      throw ConfigError("dataset.images and dataset.labels are required for idx data");
    }
    if (architecture.kind == "mlp") {
      if (architecture.widths.size() < 2) throw ConfigError("architecture.widths needs at least two entries");
    } else if (architecture.kind == "convnet") {
      if (architecture.convs.empty()) throw ConfigError("architecture.convs must not be empty");
    } else {
      throw ConfigError("architecture.kind must be mlp or convnet");
    }
    pretrain.train.validate();
    schedule.criterion.validate();
    schedule.train.validate();
    if (schedule.scoring_batch == 0) throw ConfigError("prune.scoring_batch must be >= 1");
    for (const auto& c : criteria) parse_criterion(c);
    for (double t : targets) {
      if (!(t >= 0.0 && t < 1.0)) throw ConfigError("targets must lie in [0, 1)");
    }
  }
};

/// Desk benchmarks:
///   A  two moons, MLP 2-32-32-2
///   B  8-class Gaussian blobs in 16 dimensions, MLP 16-64-64-8
///   C  8x8 stroke images, conv 3x3x1x8 -> conv 3x3x8x16 -> dense
inline ExperimentConfig benchmark_config(const std::string& name) {
  ExperimentConfig c;
  c.benchmark = name;
  c.name = "benchmark-" + name;
  if (name == "A") {
    c.dataset.kind = "two_moons";
    c.dataset.n = 1000;
    c.dataset.noise = 0.1;
    c.architecture.widths = {2, 32, 32, 2};
    c.pretrain.steps = 3000;
    c.pretrain.train = TrainConfig{0.05, 0.9, 32, 0};
    c.schedule.train = TrainConfig{0.01, 0.9, 32, 0};
  } else if (name == "B") {
    c.dataset.kind = "blobs";
    c.dataset.n_per_class = 250;
    c.dataset.n_classes = 8;
    c.dataset.dim = 16;
    c.dataset.spread = 1.0;
    c.architecture.widths = {16, 64, 64, 8};
    c.pretrain.steps = 2000;
    c.pretrain.train = TrainConfig{0.01, 0.9, 32, 0};
    c.schedule.train = TrainConfig{0.01, 0.9, 32, 0};
    c.schedule.scoring_batch = 128;
  } else if (name == "C") {
    c.dataset.kind = "strokes";
    c.dataset.n_per_class = 200;
    c.dataset.size = 8;
    c.dataset.noise = 0.3;
    c.architecture.kind = "convnet";
    c.architecture.convs = {{3, 8}, {3, 16}};
    c.architecture.dense = {};
    c.pretrain.steps = 2000;
    c.pretrain.train = TrainConfig{0.02, 0.9, 32, 0};
    c.schedule.train = TrainConfig{0.01, 0.9, 32, 0};
  } else {
    throw ConfigError("unknown benchmark '" + name + "' (expected A, B or C)");
  }
  return c;
}

struct BenchmarkData {
  Dataset train;
  Dataset eval;
};

inline BenchmarkData make_data(const DatasetSpec& d) {
  Dataset all;
  if (d.kind == "blobs") {
    all = gen_blobs(d.n_per_class, d.n_classes, d.dim, d.spread, d.seed);
  } else if (d.kind == "two_moons") {
    all = gen_two_moons(d.n, d.noise, d.seed);
  } else if (d.kind == "strokes") {
    all = gen_stroke_images(d.n_per_class, d.size, d.noise, d.seed);
  } else if (d.kind == "idx") {
    all = load_idx(d.images, d.labels);
  } else {
    throw ConfigError("unknown dataset kind '" + d.kind + "'");
  }
  auto [train, eval] = split_dataset(all, d.eval_fraction, d.seed + 1);
  return {std::move(train), std::move(eval)};
}

inline Network build_network(const ArchitectureSpec& a, const Dataset& data, std::uint64_t seed) {
  const auto shape = data.sample_shape();
  if (a.kind == "mlp") {
    if (shape.size() != 1 || shape[0] != a.widths.front()) {
      throw ConfigError("architecture.widths[0] = " + std::to_string(a.widths.front()) +
                        " does not match the sample shape " + Tensor::shape_string(shape));
    }
    if (a.widths.back() != data.n_classes) {
      throw ConfigError("architecture.widths must end with the class count " + std::to_string(data.n_classes));
    }
    return make_mlp(a.widths, seed);
  }
  if (shape.size() != 3) throw ConfigError("convnet needs H x W x C samples, got " + Tensor::shape_string(shape));
  return make_convnet(shape[0], shape[1], shape[2], a.convs, a.dense, data.n_classes, seed);
}

struct PretrainResult {
  Network net;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  double train_accuracy = 0.0;
  double eval_accuracy = 0.0;
  std::vector<double> losses;
};

/// Trains a freshly initialized network; `seed` drives init and batch order.
inline PretrainResult pretrain(const ExperimentConfig& cfg, const BenchmarkData& data, std::uint64_t seed) {
  Network net = build_network(cfg.architecture, data.train, seed);
  TrainConfig tc = cfg.pretrain.train;
  tc.seed = seed;
  auto losses = finetune(net, data.train, cfg.pretrain.steps, tc);
  PretrainResult r{std::move(net), seed, cfg.pretrain.steps, 0.0, 0.0, std::move(losses)};
  r.train_accuracy = evaluate(r.net, data.train);
  r.eval_accuracy = evaluate(r.net, data.eval);
  return r;
}

inline Json to_json(const PretrainResult& r) {
  return {{"seed", r.seed},
          {"steps", r.steps},
          {"train_accuracy", r.train_accuracy},
          {"eval_accuracy", r.eval_accuracy},
          {"final_loss", r.losses.empty() ? Json(nullptr) : Json(r.losses.back())},
          {"params", r.net.param_count()},
          {"flops", count_flops(r.net)}};
}

/// Source of the starting network for each seed.
using CheckpointSource = std::function<const Network&(std::uint64_t seed)>;

/// Pretrains once per seed (or loads cfg.checkpoint) and caches the result.
class CheckpointCache {
 public:
  CheckpointCache(const ExperimentConfig& cfg, const BenchmarkData& data) : cfg_(cfg), data_(data) {}

  const Network& operator()(std::uint64_t seed) {
    auto it = nets_.find(seed);
    if (it != nets_.end()) return it->second.net;
    PretrainResult r;
    if (!cfg_.checkpoint.empty()) {
      r.net = load_checkpoint(cfg_.checkpoint);
      r.seed = seed;
      r.train_accuracy = evaluate(r.net, data_.train);
      r.eval_accuracy = evaluate(r.net, data_.eval);
    } else {
      r = pretrain(cfg_, data_, seed);
    }
    return nets_.emplace(seed, std::move(r)).first->second.net;
  }

  const PretrainResult& info(std::uint64_t seed) {
    (*this)(seed);
    return nets_.at(seed);
  }

 private:
  const ExperimentConfig& cfg_;
  const BenchmarkData& data_;
  std::map<std::uint64_t, PretrainResult> nets_;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<AggregateRow> aggregates;
  /// Full pruning report per successful cell, in row order (null for failed or unpruned cells).
  std::vector<Json> reports;
  std::size_t failed = 0;
};

namespace detail {

inline ExperimentRow make_row(std::string experiment, std::string criterion, std::string mode, double target,
                              std::size_t budget, std::uint64_t seed) {
  ExperimentRow r;
  r.experiment = std::move(experiment);
  r.criterion = std::move(criterion);
  r.mode = std::move(mode);
  r.target = target;
  r.budget = budget;
  r.seed = seed;
  return r;
}

inline ExperimentRow run_cell(ExperimentRow row, const Network& start, const PruneSchedule& schedule,
                              const BenchmarkData& data, Json* report) {
  try {
    if (schedule.rho_global == 0.0) {
      row.accuracy = evaluate(start, data.eval);
      row.params_removed_pct = 0.0;
      row.flops_removed_pct = 0.0;
      *report = nullptr;
      return row;
    }
    const PruneResult r = prune_network(start, schedule, data.train, &data.eval);
    row.accuracy = r.report.accuracy;
    row.params_removed_pct = r.report.params_removed_pct();
    row.flops_removed_pct = r.report.flops_removed_pct();
    *report = to_json(r.report);
    if (r.report.aborted) {
      row.ok = false;
      row.error = r.report.abort_reason;
    }
  } catch (const Error& e) {
    row.ok = false;
    row.error = e.what();
    *report = nullptr;
  }
  return row;
}

inline ExperimentResult finish(ExperimentResult res) {
  res.aggregates = aggregate(res.rows);
  for (const auto& r : res.rows) res.failed += !r.ok;
  return res;
}

inline PruneSchedule cell_schedule(const ExperimentConfig& cfg, std::uint64_t seed) {
  PruneSchedule s = cfg.schedule;
  s.seed = seed;
  s.train.seed = seed;
  return s;
}

}  // namespace detail

/// Every criterion at every target, no fine-tuning, each cell starting from
/// the same checkpoint. Target 0 rows report the checkpoint itself.
inline ExperimentResult run_ablation(const ExperimentConfig& cfg, const BenchmarkData& data,
                                     const CheckpointSource& checkpoint) {
  if (cfg.criteria.empty()) throw ConfigError("ablation needs a non-empty criteria list");
  if (cfg.targets.empty()) throw ConfigError("ablation needs at least one target");
  ExperimentResult res;
  for (std::uint64_t seed : cfg.seeds) {
    const Network& start = checkpoint(seed);
    for (double target : cfg.targets) {
      for (const auto& name : cfg.criteria) {
        PruneSchedule s = detail::cell_schedule(cfg, seed);
        const CriterionSpec parsed = parse_criterion(name);
        s.criterion.kind = parsed.kind;
        s.criterion.p = parsed.p;
        s.rho_global = target;
        s.finetune_steps = 0;
        s.finetune_budget.reset();
        ExperimentRow row = detail::make_row("ablation", criterion_name(s.criterion), to_string(s.mode), target, 0, seed);
        res.reports.emplace_back();
        res.rows.push_back(detail::run_cell(row, start, s, data, &res.reports.back()));
      }
    }
  }
  return detail::finish(std::move(res));
}

/// Entwined and post-pruning arms at each total fine-tune budget, same seeds
/// and data order in both arms.
inline ExperimentResult run_schedule_comparison(const ExperimentConfig& cfg, const BenchmarkData& data,
                                                const CheckpointSource& checkpoint) {
  if (cfg.budgets.empty()) throw ConfigError("schedule comparison needs at least one budget");
  ExperimentResult res;
  for (std::uint64_t seed : cfg.seeds) {
    const Network& start = checkpoint(seed);
    for (std::size_t budget : cfg.budgets) {
      for (ScheduleMode mode : {ScheduleMode::entwined, ScheduleMode::post_pruning}) {
        PruneSchedule s = detail::cell_schedule(cfg, seed);
        s.mode = mode;
        s.finetune_budget = budget;
        ExperimentRow row = detail::make_row("schedule", criterion_name(s.criterion), to_string(mode), s.rho_global, budget, seed);
        res.reports.emplace_back();
        res.rows.push_back(detail::run_cell(row, start, s, data, &res.reports.back()));
      }
    }
  }
  return detail::finish(std::move(res));
}

/// One pruning run per (target, seed) with the configured schedule.
inline ExperimentResult run_sweep(const ExperimentConfig& cfg, const BenchmarkData& data,
                                  const CheckpointSource& checkpoint) {
  if (cfg.targets.empty()) throw ConfigError("sweep needs at least one target");
  for (std::size_t i = 1; i < cfg.targets.size(); ++i) {
    if (!(cfg.targets[i] > cfg.targets[i - 1])) throw ConfigError("sweep targets must be strictly increasing");
  }
  ExperimentResult res;
  for (std::uint64_t seed : cfg.seeds) {
    const Network& start = checkpoint(seed);
    for (double target : cfg.targets) {
      PruneSchedule s = detail::cell_schedule(cfg, seed);
      s.rho_global = target;
      ExperimentRow row = detail::make_row("sweep", criterion_name(s.criterion), to_string(s.mode), target, 0, seed);
      res.reports.emplace_back();
      res.rows.push_back(detail::run_cell(row, start, s, data, &res.reports.back()));
    }
  }
  return detail::finish(std::move(res));
}

/// Decay-path trajectories of the configured neurons on one scoring batch.
inline std::vector<TrajectoryRecord> run_trajectory(const ExperimentConfig& cfg, const BenchmarkData& data,
                                                    const Network& net, std::uint64_t seed) {
  net.check_layer(cfg.trajectory.layer);
  BatchStream stream(data.train, std::min(cfg.schedule.scoring_batch, data.train.size()), seed);
  const Batch batch = stream.next();
  std::vector<std::size_t> neurons = cfg.trajectory.neurons;
  if (neurons.empty()) {
    for (std::size_t n = 0; n < net.layer(cfg.trajectory.layer).units(); ++n) neurons.push_back(n);
  }
  std::vector<TrajectoryRecord> out;
  for (std::size_t n : neurons) out.push_back(trajectory_log(net, batch, cfg.trajectory.layer, n, cfg.schedule.criterion));
  return out;
}

inline Json to_json(const ExperimentResult& r) {
  Json rows = Json::array(), aggs = Json::array(), cells = Json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  for (const auto& a : r.aggregates) aggs.push_back(to_json(a));
  for (const auto& c : r.reports) cells.push_back(c);
  return {{"rows", rows}, {"aggregates", aggs}, {"cells", cells}, {"failed_cells", r.failed}};
}

}  // namespace igprune
