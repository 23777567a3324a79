#pragma once

// Machine-readable outputs: JSON for reports, CSV for tables and curves.
// Column schemas are listed in README.md.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "igprune/criteria.hpp"
#include "igprune/error.hpp"
#include "igprune/pruner.hpp"

namespace igprune {

using Json = nlohmann::ordered_json;

namespace detail {

/// JSON has no NaN; missing measurements become null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

/// Shortest text that reads back to the same double.
inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

}  // namespace detail

inline void write_json(const Json& j, const std::filesystem::path& path) {
  auto f = detail::open_for_write(path);
  f << j.dump(2) << '\n';
}

inline Json to_json(const CriterionSpec& s) {
  return {{"name", criterion_name(s)},
          {"p", s.p},
          {"mu", s.mu},
          {"stop_epsilon", s.stop_epsilon},
          {"path_steps", s.path_steps()},
          {"granularity", s.granularity == Granularity::neuron ? "neuron" : "weight"}};
}

inline Json to_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"momentum", t.momentum}, {"batch_size", t.batch_size}, {"seed", t.seed}};
}

inline Json to_json(const PruneSchedule& s) {
  Json j{{"rho_global", s.rho_global},
         {"strategy", to_string(s.strategy)},
         {"finetune_steps", s.finetune_steps},
         {"finetune_budget", s.finetune_budget ? Json(*s.finetune_budget) : Json(nullptr)},
         {"mode", to_string(s.mode)},
         {"criterion", to_json(s.criterion)},
         {"train", to_json(s.train)},
         {"scoring_batch", s.scoring_batch},
         {"group_size", s.group_size},
         {"seed", s.seed}};
  if (!s.explicit_budgets.empty()) j["explicit_budgets"] = s.explicit_budgets;
  return j;
}

inline Json to_json(const RemovalEvent& e) {
  return {{"step", e.step},
          {"layer", e.layer},
          {"units", e.units},
          {"score", e.score},
          {"finetune_steps", e.finetune_steps},
          {"accuracy", detail::number_or_null(e.accuracy)},
          {"params_remaining", e.params_remaining},
          {"flops_remaining", e.flops_remaining}};
}

inline Json to_json(const PruneReport& r) {
  Json events = Json::array();
  for (const auto& e : r.events) events.push_back(to_json(e));
  return {{"schedule", to_json(r.schedule)},
          {"budgets", r.budgets},
          {"evaluations", r.evaluations},
          {"removals", r.removals},
          {"events", events},
          {"final",
           {{"accuracy", detail::number_or_null(r.accuracy)},
            {"params_before", r.params_before},
            {"params_after", r.params_after},
            {"flops_before", r.flops_before},
            {"flops_after", r.flops_after},
            {"params_removed_pct", r.params_removed_pct()},
            {"flops_removed_pct", r.flops_removed_pct()}}},
          {"aborted", r.aborted},
          {"abort_reason", r.abort_reason}};
}

/// step,layer,units,score,finetune_steps,accuracy,params_remaining,flops_remaining
/// (units are space-separated).
inline void write_events_csv(const PruneReport& r, const std::filesystem::path& path) {
  auto f = detail::open_for_write(path);
  f << "step,layer,units,score,finetune_steps,accuracy,params_remaining,flops_remaining\n";
  for (const auto& e : r.events) {
    f << e.step << ',' << e.layer << ',';
    for (std::size_t i = 0; i < e.units.size(); ++i) f << (i ? " " : "") << e.units[i];
    f << ',' << detail::csv_number(e.score) << ',' << e.finetune_steps << ',' << detail::csv_number(e.accuracy) << ','
      << e.params_remaining << ',' << e.flops_remaining << '\n';
  }
}

/// layer,neuron,s,magnitude,grad_norm
inline void write_trajectory_csv(const std::vector<TrajectoryRecord>& records, const std::filesystem::path& path) {
  auto f = detail::open_for_write(path);
  f << "layer,neuron,s,magnitude,grad_norm\n";
  for (const auto& r : records) {
    for (std::size_t s = 0; s < r.points.size(); ++s) {
      f << r.layer_index << ',' << r.neuron_index << ',' << s << ',' << detail::csv_number(r.points[s].magnitude) << ','
        << detail::csv_number(r.points[s].grad_norm) << '\n';
    }
  }
}

/// step,loss
inline void write_loss_csv(const std::vector<double>& losses, const std::filesystem::path& path) {
  auto f = detail::open_for_write(path);
  f << "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) f << i << ',' << detail::csv_number(losses[i]) << '\n';
}

// ---------------------------------------------------------------------------
// Experiment tables
// ---------------------------------------------------------------------------

/// One (criterion x target x budget x mode x seed) cell.
struct ExperimentRow {
  std::string experiment;
  std::string criterion;
  std::string mode;
  double target = 0.0;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  double params_removed_pct = std::numeric_limits<double>::quiet_NaN();
  double flops_removed_pct = std::numeric_limits<double>::quiet_NaN();
  bool ok = true;
  std::string error;
};

/// Mean and sample standard deviation over the successful seeds of one cell.
struct AggregateRow {
  std::string experiment;
  std::string criterion;
  std::string mode;
  double target = 0.0;
  std::size_t budget = 0;
  std::size_t n = 0;
  std::size_t failed = 0;
  double accuracy_mean = std::numeric_limits<double>::quiet_NaN();
  /// NaN unless n >= 2.
  double accuracy_std = std::numeric_limits<double>::quiet_NaN();
  double params_removed_pct_mean = std::numeric_limits<double>::quiet_NaN();
  double flops_removed_pct_mean = std::numeric_limits<double>::quiet_NaN();
  bool single_seed = false;
};

inline std::vector<AggregateRow> aggregate(const std::vector<ExperimentRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string, double, std::size_t>;
  std::vector<Key> order;
  std::map<Key, std::vector<const ExperimentRow*>> groups;
  for (const auto& r : rows) {
    Key k{r.experiment, r.criterion, r.mode, r.target, r.budget};
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (const auto& k : order) {
    AggregateRow a;
    std::tie(a.experiment, a.criterion, a.mode, a.target, a.budget) = k;
    double acc = 0.0, params = 0.0, flops = 0.0;
    for (const auto* r : groups[k]) {
      if (!r->ok) {
        ++a.failed;
        continue;
      }
      ++a.n;
      acc += r->accuracy;
      params += r->params_removed_pct;
      flops += r->flops_removed_pct;
    }
    if (a.n > 0) {
      const double n = static_cast<double>(a.n);
      a.accuracy_mean = acc / n;
      a.params_removed_pct_mean = params / n;
      a.flops_removed_pct_mean = flops / n;
    }
    if (a.n >= 2) {
      double ss = 0.0;
      for (const auto* r : groups[k]) {
        if (r->ok) ss += (r->accuracy - a.accuracy_mean) * (r->accuracy - a.accuracy_mean);
      }
      a.accuracy_std = std::sqrt(ss / static_cast<double>(a.n - 1));
    }
    a.single_seed = a.n == 1;
    out.push_back(a);
  }
  return out;
}

/// experiment,criterion,mode,target,budget,seed,accuracy,params_removed_pct,flops_removed_pct,status,error
inline void write_rows_csv(const std::vector<ExperimentRow>& rows, const std::filesystem::path& path) {
  auto f = detail::open_for_write(path);
  f << "experiment,criterion,mode,target,budget,seed,accuracy,params_removed_pct,flops_removed_pct,status,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (char& c : err) {
      if (c == ',' || c == '\n') c = ';';
    }
    f << r.experiment << ',' << r.criterion << ',' << r.mode << ',' << detail::csv_number(r.target) << ',' << r.budget
      << ',' << r.seed << ',' << detail::csv_number(r.accuracy) << ',' << detail::csv_number(r.params_removed_pct) << ','
      << detail::csv_number(r.flops_removed_pct) << ',' << (r.ok ? "ok" : "failed") << ',' << err << '\n';
  }
}

/// experiment,criterion,mode,target,budget,n,failed,accuracy_mean,accuracy_std,
/// params_removed_pct_mean,flops_removed_pct_mean,single_seed
inline void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::filesystem::path& path) {
  auto f = detail::open_for_write(path);
  f << "experiment,criterion,mode,target,budget,n,failed,accuracy_mean,accuracy_std,params_removed_pct_mean,"
       "flops_removed_pct_mean,single_seed\n";
  for (const auto& a : rows) {
    f << a.experiment << ',' << a.criterion << ',' << a.mode << ',' << detail::csv_number(a.target) << ',' << a.budget
      << ',' << a.n << ',' << a.failed << ',' << detail::csv_number(a.accuracy_mean) << ','
      << detail::csv_number(a.accuracy_std) << ',' << detail::csv_number(a.params_removed_pct_mean) << ','
      << detail::csv_number(a.flops_removed_pct_mean) << ',' << (a.single_seed ? 1 : 0) << '\n';
  }
}

inline Json to_json(const ExperimentRow& r) {
  return {{"experiment", r.experiment},
          {"criterion", r.criterion},
          {"mode", r.mode},
          {"target", r.target},
          {"budget", r.budget},
          {"seed", r.seed},
          {"accuracy", detail::number_or_null(r.accuracy)},
          {"params_removed_pct", detail::number_or_null(r.params_removed_pct)},
          {"flops_removed_pct", detail::number_or_null(r.flops_removed_pct)},
          {"status", r.ok ? "ok" : "failed"},
          {"error", r.error}};
}

inline Json to_json(const AggregateRow& a) {
  return {{"experiment", a.experiment},
          {"criterion", a.criterion},
          {"mode", a.mode},
          {"target", a.target},
          {"budget", a.budget},
          {"n", a.n},
          {"failed", a.failed},
          {"accuracy_mean", detail::number_or_null(a.accuracy_mean)},
          {"accuracy_std", detail::number_or_null(a.accuracy_std)},
          {"params_removed_pct_mean", detail::number_or_null(a.params_removed_pct_mean)},
          {"flops_removed_pct_mean", detail::number_or_null(a.flops_removed_pct_mean)},
          {"single_seed", a.single_seed}};
}

}  // namespace igprune
