#pragma once

// YAML experiment configuration. The grammar (version 1) is documented in
// README.md; unknown keys are rejected so typos cannot silently fall back to
// defaults.

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "igprune/error.hpp"
#include "igprune/experiment.hpp"
#include "igprune/report.hpp"

namespace igprune {

inline constexpr int kConfigVersion = 1;

namespace detail {

inline void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(where + "." + key + ": " + e.msg);
  }
}

inline void read_train(const YAML::Node& n, TrainConfig& t, const std::string& where) {
  read(n, "learning_rate", t.learning_rate, where);
  read(n, "momentum", t.momentum, where);
  read(n, "batch_size", t.batch_size, where);
}

}  // namespace detail

/// Builds a config from a parsed YAML document. A `benchmark` key selects a
/// preset that the remaining keys override.
inline ExperimentConfig parse_config(const YAML::Node& root) {
  using detail::read;
  detail::check_keys(root, "config",
                     {"version", "name", "benchmark", "dataset", "architecture", "pretrain", "prune", "criterion",
                      "criteria", "targets", "budgets", "seeds", "trajectory", "output", "checkpoint"});
  if (!root["version"]) throw ConfigError("config: missing 'version'");
  if (root["version"].as<int>() != kConfigVersion) {
    throw ConfigError("config: unsupported version " + root["version"].as<std::string>());
  }
  ExperimentConfig c;
  if (root["benchmark"]) c = benchmark_config(root["benchmark"].as<std::string>());
  read(root, "name", c.name, "config");

  if (const auto d = root["dataset"]) {
    detail::check_keys(d, "dataset",
                       {"kind", "seed", "eval_fraction", "n_per_class", "n_classes", "dim", "spread", "n", "noise",
                        "size", "images", "labels"});
    auto& s = c.dataset;
    read(d, "kind", s.kind, "dataset");
    read(d, "seed", s.seed, "dataset");
    read(d, "eval_fraction", s.eval_fraction, "dataset");
    read(d, "n_per_class", s.n_per_class, "dataset");
    read(d, "n_classes", s.n_classes, "dataset");
    read(d, "dim", s.dim, "dataset");
    read(d, "spread", s.spread, "dataset");
    read(d, "n", s.n, "dataset");
    read(d, "noise", s.noise, "dataset");
    read(d, "size", s.size, "dataset");
    read(d, "images", s.images, "dataset");
    read(d, "labels", s.labels, "dataset");
  }

  if (const auto a = root["architecture"]) {
    detail::check_keys(a, "architecture", {"kind", "widths", "convs", "dense"});
    auto& s = c.architecture;
    read(a, "kind", s.kind, "architecture");
    read(a, "widths", s.widths, "architecture");
    read(a, "dense", s.dense, "architecture");
    if (const auto convs = a["convs"]) {
      if (!convs.IsSequence()) throw ConfigError("architecture.convs must be a list");
      s.convs.clear();
      for (const auto& item : convs) {
        detail::check_keys(item, "architecture.convs[]", {"kernel", "channels"});
        ConvSpec cs;
        read(item, "kernel", cs.kernel, "architecture.convs[]");
        read(item, "channels", cs.channels, "architecture.convs[]");
        s.convs.push_back(cs);
      }
    }
  }

  if (const auto p = root["pretrain"]) {
    detail::check_keys(p, "pretrain", {"steps", "learning_rate", "momentum", "batch_size"});
    read(p, "steps", c.pretrain.steps, "pretrain");
    detail::read_train(p, c.pretrain.train, "pretrain");
  }

  if (const auto p = root["prune"]) {
    detail::check_keys(p, "prune",
                       {"rho", "strategy", "explicit_budgets", "finetune_steps", "finetune_budget", "mode",
                        "learning_rate", "momentum", "batch_size", "scoring_batch", "group_size", "workers"});
    auto& s = c.schedule;
    read(p, "rho", s.rho_global, "prune");
    if (p["strategy"]) s.strategy = parse_budget_strategy(p["strategy"].as<std::string>());
    read(p, "explicit_budgets", s.explicit_budgets, "prune");
    read(p, "finetune_steps", s.finetune_steps, "prune");
    if (p["finetune_budget"]) s.finetune_budget = p["finetune_budget"].as<std::size_t>();
    if (p["mode"]) s.mode = parse_schedule_mode(p["mode"].as<std::string>());
    detail::read_train(p, s.train, "prune");
    read(p, "scoring_batch", s.scoring_batch, "prune");
    read(p, "group_size", s.group_size, "prune");
    read(p, "workers", s.workers, "prune");
  }

  if (const auto k = root["criterion"]) {
    detail::check_keys(k, "criterion", {"name", "mu", "stop_epsilon", "granularity"});
    auto& s = c.schedule.criterion;
    if (k["name"]) {
      const CriterionSpec parsed = parse_criterion(k["name"].as<std::string>());
      s.kind = parsed.kind;
      s.p = parsed.p;
    }
    read(k, "mu", s.mu, "criterion");
    read(k, "stop_epsilon", s.stop_epsilon, "criterion");
    if (k["granularity"]) {
      const auto g = k["granularity"].as<std::string>();
      if (g == "neuron") {
        s.granularity = Granularity::neuron;
      } else if (g == "weight") {
        s.granularity = Granularity::weight;
      } else {
        throw ConfigError("criterion.granularity must be neuron or weight");
      }
    }
  }

  read(root, "criteria", c.criteria, "config");
  read(root, "targets", c.targets, "config");
  read(root, "budgets", c.budgets, "config");
  read(root, "seeds", c.seeds, "config");
  if (const auto t = root["trajectory"]) {
    detail::check_keys(t, "trajectory", {"layer", "neurons"});
    read(t, "layer", c.trajectory.layer, "trajectory");
    read(t, "neurons", c.trajectory.neurons, "trajectory");
  }
  read(root, "output", c.output, "config");
  read(root, "checkpoint", c.checkpoint, "config");
  c.validate();
  return c;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  try {
    return parse_config(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  try {
    ExperimentConfig c = parse_config(YAML::LoadFile(path.string()));
    // Relative data and checkpoint paths resolve against the config file.
    const auto base = path.parent_path();
    auto resolve = [&](std::string& p) {
      if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
    };
    resolve(c.dataset.images);
    resolve(c.dataset.labels);
    resolve(c.checkpoint);
    return c;
  } catch (const YAML::Exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

inline Json to_json(const ExperimentConfig& c) {
  Json convs = Json::array();
  for (const auto& cs : c.architecture.convs) convs.push_back({{"kernel", cs.kernel}, {"channels", cs.channels}});
  const auto& d = c.dataset;
  return {{"version", kConfigVersion},
          {"name", c.name},
          {"benchmark", c.benchmark},
          {"dataset",
           {{"kind", d.kind},
            {"seed", d.seed},
            {"eval_fraction", d.eval_fraction},
            {"n_per_class", d.n_per_class},
            {"n_classes", d.n_classes},
            {"dim", d.dim},
            {"spread", d.spread},
            {"n", d.n},
            {"noise", d.noise},
            {"size", d.size},
            {"images", d.images},
            {"labels", d.labels}}},
          {"architecture",
           {{"kind", c.architecture.kind},
            {"widths", c.architecture.widths},
            {"convs", convs},
            {"dense", c.architecture.dense}}},
          {"pretrain", {{"steps", c.pretrain.steps}, {"train", to_json(c.pretrain.train)}}},
          {"schedule", to_json(c.schedule)},
          {"criteria", c.criteria},
          {"targets", c.targets},
          {"budgets", c.budgets},
          {"seeds", c.seeds},
          {"trajectory", {{"layer", c.trajectory.layer}, {"neurons", c.trajectory.neurons}}},
          {"output", c.output},
          {"checkpoint", c.checkpoint}};
}

}  // namespace igprune
