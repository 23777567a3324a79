// igprune: experiment runner.
//
//   igprune <pretrain|ablation|schedule-compare|sweep|trajectory>
//           --config <path> [--out <dir>] [--seed <int>]
//
// Exit codes: 0 success, 1 configuration error, 2 one or more cells failed.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "igprune/config.hpp"
#include "igprune/experiment.hpp"
#include "igprune/report.hpp"

namespace fs = std::filesystem;
using namespace igprune;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void write_experiment(const std::string& kind, const ExperimentConfig& cfg, const ExperimentResult& res,
                      const fs::path& out) {
  Json j{{"experiment", kind}, {"config", to_json(cfg)}};
  j.update(to_json(res));
  write_json(j, out / (kind + ".json"));
  write_rows_csv(res.rows, out / (kind + "_rows.csv"));
  write_aggregate_csv(res.aggregates, out / (kind + "_summary.csv"));
  for (const auto& a : res.aggregates) {
    std::printf("%-10s %-9s %-12s target=%.3g budget=%zu  ", a.experiment.c_str(), a.criterion.c_str(), a.mode.c_str(),
                a.target, a.budget);
    if (a.n == 0) {
      std::printf("all %zu cells failed\n", a.failed);
      continue;
    }
    std::printf("acc=%.4f", a.accuracy_mean);
    if (!a.single_seed) std::printf(" +- %.4f", a.accuracy_std);
    std::printf(" (n=%zu)  params-%.1f%%  flops-%.1f%%", a.n, a.params_removed_pct_mean, a.flops_removed_pct_mean);
    if (a.failed) std::printf("  [%zu failed]", a.failed);
    std::printf("\n");
  }
}

int run(const std::string& command, const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config);
  if (opt.seed) cfg.seeds = {*opt.seed};
  const fs::path out = opt.out.empty() ? fs::path(cfg.output) : fs::path(opt.out);
  fs::create_directories(out);
  const BenchmarkData data = make_data(cfg.dataset);
  CheckpointCache cache(cfg, data);

  if (command == "pretrain") {
    Json runs = Json::array();
    for (std::uint64_t seed : cfg.seeds) {
      const PretrainResult& r = cache.info(seed);
      const fs::path ckpt = out / ("checkpoint_seed" + std::to_string(seed) + ".snge");
      save_checkpoint(r.net, ckpt);
      write_loss_csv(r.losses, out / ("pretrain_loss_seed" + std::to_string(seed) + ".csv"));
      Json meta = to_json(r);
      meta["checkpoint"] = ckpt.filename().string();
      write_json(meta, out / ("checkpoint_seed" + std::to_string(seed) + ".json"));
      runs.push_back(meta);
      std::printf("seed %llu: train %.4f eval %.4f -> %s\n", static_cast<unsigned long long>(seed),
                  r.train_accuracy, r.eval_accuracy, ckpt.string().c_str());
    }
    write_json({{"experiment", "pretrain"}, {"config", to_json(cfg)}, {"runs", runs}}, out / "pretrain.json");
    return kExitOk;
  }

  CheckpointSource source = [&cache](std::uint64_t seed) -> const Network& { return cache(seed); };
  if (command == "trajectory") {
    std::vector<TrajectoryRecord> all;
    for (std::uint64_t seed : cfg.seeds) {
      auto recs = run_trajectory(cfg, data, source(seed), seed);
      write_trajectory_csv(recs, out / ("trajectory_seed" + std::to_string(seed) + ".csv"));
      all.insert(all.end(), recs.begin(), recs.end());
    }
    std::printf("%zu trajectories written to %s\n", all.size(), out.string().c_str());
    return kExitOk;
  }

  ExperimentResult res;
  std::string kind;
  if (command == "ablation") {
    kind = "ablation";
    res = run_ablation(cfg, data, source);
  } else if (command == "schedule-compare") {
    kind = "schedule";
    res = run_schedule_comparison(cfg, data, source);
  } else {
    kind = "sweep";
    res = run_sweep(cfg, data, source);
  }
  write_experiment(kind, cfg, res, out);
  if (res.failed) {
    std::fprintf(stderr, "%zu of %zu cells failed\n", res.failed, res.rows.size());
    return kExitPartial;
  }
  return kExitOk;
}

const char* describe(const std::string& name) {
  if (name == "pretrain") return "Train the benchmark network and save a checkpoint per seed";
  if (name == "ablation") return "Compare criteria across targets without fine-tuning";
  if (name == "schedule-compare") return "Entwined against post-pruning fine-tuning at equal budgets";
  if (name == "sweep") return "Prune to each target with the configured schedule";
  return "Log magnitude and gradient norm along the decay path";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured pruning experiments"};
  app.require_subcommand(1);
  Options opt;
  for (const char* name : {"pretrain", "ablation", "schedule-compare", "sweep", "trajectory"}) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", opt.config, "YAML experiment configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (overrides the config)");
    sub->add_option("--seed", opt.seed, "Single seed (overrides the config's seed list)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial;
  }
}
