#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "igprune/config.hpp"
#include "igprune/experiment.hpp"

using namespace igprune;

namespace {

// Small enough that every driver finishes in well under a second.
ExperimentConfig tiny() {
  return parse_config_string(R"(
version: 1
dataset: {kind: blobs, n_per_class: 30, n_classes: 3, dim: 4, spread: 0.5}
architecture: {kind: mlp, widths: [4, 8, 8, 3]}
pretrain: {steps: 150, learning_rate: 0.05, momentum: 0.9, batch_size: 16}
prune: {finetune_steps: 2, learning_rate: 0.01, batch_size: 16, scoring_batch: 16}
criterion: {name: IG2, mu: 0.7}
criteria: [L2, IG2]
targets: [0.3, 0.5, 0.7]
budgets: [0, 20]
seeds: [0, 1]
)");
}

}  // namespace

TEST(Experiment, PresetsBuildMatchingNetworks) {
  for (const char* b : {"A", "B", "C"}) {
    auto cfg = benchmark_config(b);
    cfg.dataset.n = 100;
    cfg.dataset.n_per_class = 10;
    const auto data = make_data(cfg.dataset);
    const Network net = build_network(cfg.architecture, data.train, 0);
    EXPECT_EQ(net.layer(net.depth() - 1).units(), data.train.n_classes) << b;
  }
  EXPECT_THROW(benchmark_config("D"), ConfigError);
}

TEST(Experiment, ArchitectureMismatchIsAConfigError) {
  auto cfg = tiny();
  cfg.architecture.widths = {5, 8, 3};
  const auto data = make_data(cfg.dataset);
  EXPECT_THROW(build_network(cfg.architecture, data.train, 0), ConfigError);
}

TEST(Experiment, PretrainIsDeterministicAndReportsMetadata) {
  const auto cfg = tiny();
  const auto data = make_data(cfg.dataset);
  const auto a = pretrain(cfg, data, 3);
  const auto b = pretrain(cfg, data, 3);
  EXPECT_EQ(a.losses, b.losses);
  EXPECT_GT(a.train_accuracy, 0.9);
  const Json j = to_json(a);
  EXPECT_EQ(j["seed"], 3);
  EXPECT_EQ(j["steps"], 150);
  EXPECT_EQ(j["params"], a.net.param_count());
  EXPECT_DOUBLE_EQ(j["eval_accuracy"].get<double>(), a.eval_accuracy);
}

TEST(Experiment, SweepGivesOneRowPerTargetAndSeedWithGrowingRemoval) {
  const auto cfg = tiny();
  const auto data = make_data(cfg.dataset);
  CheckpointCache cache(cfg, data);
  const auto res = run_sweep(cfg, data, [&](std::uint64_t s) -> const Network& { return cache(s); });
  ASSERT_EQ(res.rows.size(), 6u);
  EXPECT_EQ(res.failed, 0u);
  ASSERT_EQ(res.aggregates.size(), 3u);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t t = 0; t < 3; ++t) {
      const auto& r = res.rows[s * 3 + t];
      EXPECT_EQ(r.seed, s);
      EXPECT_DOUBLE_EQ(r.target, cfg.targets[t]);
      EXPECT_GE(r.params_removed_pct, 100.0 * cfg.targets[t] - 1e-9);
      if (t > 0) {
        EXPECT_GT(r.params_removed_pct, res.rows[s * 3 + t - 1].params_removed_pct);
      }
    }
  }
  EXPECT_EQ(res.reports.size(), res.rows.size());
  EXPECT_EQ(res.reports[0]["evaluations"], res.reports[0]["removals"]);

  auto bad = cfg;
  bad.targets = {0.5, 0.3};
  EXPECT_THROW(run_sweep(bad, data, [&](std::uint64_t s) -> const Network& { return cache(s); }), ConfigError);
}

TEST(Experiment, AblationBaselineRowEqualsCheckpointAccuracy) {
  auto cfg = tiny();
  cfg.targets = {0.0, 0.5};
  cfg.seeds = {0};
  const auto data = make_data(cfg.dataset);
  CheckpointCache cache(cfg, data);
  const auto res = run_ablation(cfg, data, [&](std::uint64_t s) -> const Network& { return cache(s); });
  ASSERT_EQ(res.rows.size(), 4u);
  const double base = evaluate(cache(0), data.eval);
  EXPECT_DOUBLE_EQ(res.rows[0].accuracy, base);
  EXPECT_DOUBLE_EQ(res.rows[1].accuracy, base);
  EXPECT_EQ(res.rows[0].params_removed_pct, 0.0);
  EXPECT_EQ(res.rows[2].criterion, "L2");
  EXPECT_EQ(res.rows[3].criterion, "IG2");
  for (const auto& rep : res.reports) {
    if (!rep.is_null()) {
      EXPECT_EQ(rep["schedule"]["finetune_steps"], 0);
    }
  }
}

TEST(Experiment, ZeroBudgetScheduleArmsAreIdentical) {
  auto cfg = tiny();
  cfg.seeds = {1};
  cfg.schedule.rho_global = 0.5;
  const auto data = make_data(cfg.dataset);
  CheckpointCache cache(cfg, data);
  const auto res =
      run_schedule_comparison(cfg, data, [&](std::uint64_t s) -> const Network& { return cache(s); });
  ASSERT_EQ(res.rows.size(), 4u);
  EXPECT_EQ(res.rows[0].mode, "entwined");
  EXPECT_EQ(res.rows[1].mode, "post_pruning");
  EXPECT_EQ(res.rows[0].budget, 0u);
  EXPECT_EQ(res.rows[0].accuracy, res.rows[1].accuracy);
  EXPECT_EQ(res.reports[0]["removals"], res.reports[1]["removals"]);
  EXPECT_EQ(res.rows[2].budget, 20u);
}

TEST(Experiment, FailedCellsAreReportedNotThrown) {
  auto cfg = tiny();
  cfg.seeds = {0};
  cfg.targets = {0.999};
  const auto data = make_data(cfg.dataset);
  CheckpointCache cache(cfg, data);
  const auto res = run_sweep(cfg, data, [&](std::uint64_t s) -> const Network& { return cache(s); });
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_FALSE(res.rows[0].ok);
  EXPECT_FALSE(res.rows[0].error.empty());
  EXPECT_EQ(res.failed, 1u);
  EXPECT_TRUE(res.reports[0].is_null());
}

TEST(Experiment, TrajectoryCsvHasOneLinePerPathPoint) {
  auto cfg = tiny();
  cfg.trajectory.layer = 0;
  cfg.trajectory.neurons = {1, 4};
  const auto data = make_data(cfg.dataset);
  CheckpointCache cache(cfg, data);
  const auto recs = run_trajectory(cfg, data, cache(0), 0);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].neuron_index, 4u);
  const std::size_t points = cfg.schedule.criterion.path_steps() + 1;
  EXPECT_EQ(recs[0].points.size(), points);
  EXPECT_NEAR(recs[0].points[1].magnitude, cfg.schedule.criterion.mu * recs[0].points[0].magnitude, 1e-12);

  const auto path = std::filesystem::temp_directory_path() / "igprune_trajectory_test.csv";
  write_trajectory_csv(recs, path);
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "layer,neuron,s,magnitude,grad_norm");
  std::size_t n = 0;
  while (std::getline(f, line)) ++n;
  EXPECT_EQ(n, 2 * points);

  cfg.trajectory.layer = 7;
  EXPECT_THROW(run_trajectory(cfg, data, cache(0), 0), Error);
}

TEST(Experiment, CheckpointCacheLoadsASharedCheckpoint) {
  auto cfg = tiny();
  const auto data = make_data(cfg.dataset);
  const auto trained = pretrain(cfg, data, 5);
  const auto path = std::filesystem::temp_directory_path() / "igprune_cache_test.snge";
  save_checkpoint(trained.net, path);
  cfg.checkpoint = path.string();
  CheckpointCache cache(cfg, data);
  const Network& a = cache(0);
  const Network& b = cache(9);
  EXPECT_EQ(forward(a, data.eval.inputs), forward(trained.net, data.eval.inputs));
  EXPECT_EQ(forward(b, data.eval.inputs), forward(trained.net, data.eval.inputs));
}
