// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.
//
//   acceptance [--only N[,M...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "igprune/experiment.hpp"
#include "test_util.hpp"

using namespace igprune;

namespace {

constexpr std::size_t kSeeds = 5;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<std::uint64_t> seeds() {
  std::vector<std::uint64_t> s(kSeeds);
  for (std::size_t i = 0; i < kSeeds; ++i) s[i] = i;
  return s;
}

// ---------------------------------------------------------------------------
// Compaction checks collected from the structured runs of criteria 4-6.
// ---------------------------------------------------------------------------

struct CompactionLog {
  std::size_t runs = 0;
  std::size_t failures = 0;
  double worst = 0.0;

  void check(const PruneResult& r, std::uint64_t seed) {
    const Network compact = apply_mask_permanently(r.net, r.mask);
    std::mt19937_64 rng(seed * 7919 + runs);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::size_t> shape{100};
    shape.insert(shape.end(), r.net.input_shape().begin(), r.net.input_shape().end());
    Tensor x(shape);
    for (double& v : x.values()) v = normal(rng);
    const Tensor a = forward(r.net, x), b = forward(compact, x);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    worst = std::max(worst, diff);
    ++runs;
    if (!(diff <= 1e-12) || count_params(compact) != r.report.params_after) ++failures;
  }
};

CompactionLog g_compaction;
std::set<int> g_compaction_sources;

const BenchmarkData& benchmark_data(const std::string& benchmark) {
  static std::map<std::string, BenchmarkData> data;
  if (!data.count(benchmark)) data.emplace(benchmark, make_data(benchmark_config(benchmark).dataset));
  return data.at(benchmark);
}

// Pretrained checkpoints, one per (benchmark, seed), shared across criteria.
CheckpointCache& checkpoints(const std::string& benchmark) {
  static std::map<std::string, ExperimentConfig> configs;
  static std::map<std::string, std::unique_ptr<CheckpointCache>> caches;
  if (!caches.count(benchmark)) {
    configs.emplace(benchmark, benchmark_config(benchmark));
    caches.emplace(benchmark, std::make_unique<CheckpointCache>(configs.at(benchmark), benchmark_data(benchmark)));
  }
  return *caches.at(benchmark);
}

// ---------------------------------------------------------------------------
// 1. Backward pass against central differences on every benchmark network.
// ---------------------------------------------------------------------------

Outcome gradient_oracle() {
  Outcome out;
  for (const char* name : {"A", "B", "C"}) {
    const ExperimentConfig cfg = benchmark_config(name);
    const BenchmarkData& data = benchmark_data(name);
    Network net = build_network(cfg.architecture, data.train, 11);
    testing::randomize_biases(net, 12);
    std::vector<std::size_t> idx(16);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const Batch batch = make_batch(data.train, idx);
    const GradientSet g = backward(net, batch);

    std::mt19937_64 rng(13);
    std::size_t checked = 0, bad = 0;
    double worst = 0.0;
    for (std::size_t l = 0; l < net.depth(); ++l) {
      const std::size_t nw = net.layer(l).weights.size(), nb = net.layer(l).bias.size();
      const std::size_t per_layer = 120 / net.depth() + 1;
      for (std::size_t k = 0; k < per_layer; ++k) {
        const bool bias = k % 5 == 4;
        const std::size_t i = std::uniform_int_distribution<std::size_t>(0, (bias ? nb : nw) - 1)(rng);
        const double analytic = bias ? g.biases[l][i] : g.weights[l][i];
        const double numeric = finite_diff_grad(net, batch, l, i, 1e-5, bias ? ParamKind::bias : ParamKind::weight);
        const double scale = std::max(std::abs(analytic), std::abs(numeric));
        // Exact zeros (dead units) carry no relative information.
        const double err = scale == 0.0 ? 0.0 : std::abs(analytic - numeric) / scale;
        if (scale > 1e-9) worst = std::max(worst, err);
        if (scale > 1e-9 && err > 1e-4) ++bad;
        ++checked;
      }
    }
    out.require(checked >= 100 && bad == 0, std::string(name) + ": " + std::to_string(bad) + " of " +
                                                std::to_string(checked) + " coordinates off");
    out.note(std::string(name) + " " + std::to_string(checked) + " coords, max rel " + fmt("%.1e", worst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2. Path sums against closed forms and the integral oracle.
// ---------------------------------------------------------------------------

Outcome riemann_fidelity() {
  Outcome out;
  const testing::ConstantGradientFixture f;
  const double g = f.grad_norm(), w = std::sqrt(8.0);
  double worst = 0.0;
  for (double mu : {0.5, 0.9, 0.99}) {
    CriterionSpec ig;
    ig.kind = CriterionKind::IGp;
    ig.mu = mu;
    const double steps = static_cast<double>(ig.path_steps());
    const double expect = g * w * (1.0 - std::pow(mu, steps + 1)) / (1.0 - mu);
    const double got = criterion_ig(f.net, f.batch, 0, ig).of(0);
    worst = std::max(worst, std::abs(got - expect) / expect);
  }
  out.require(worst <= 1e-10, "IG closed form off by " + fmt("%.1e", worst));
  out.note("IG closed form rel err " + fmt("%.1e", worst));

  // Neuron 1 of the same layer moves its own logit, so its gradient varies along the path.
  Network net = f.net;
  const double oracle = integral_oracle(net, f.batch, 0, 1, 2, 1000);
  auto gap = [&](double mu) {
    CriterionSpec sg;
    sg.kind = CriterionKind::SGp;
    sg.mu = mu;
    const auto scales = path_scales(sg);
    const auto norms = PathEvaluator(f.net, f.batch, 0).grad_norms(1, scales, 2);
    return std::abs(rescaled_path_sum(sg, 0.0, scales, norms) - oracle);
  };
  const double coarse = gap(0.9), fine = gap(0.99);
  out.require(fine < coarse, "rescaled SG not closer at mu 0.99");
  out.note("rescaled SG gap " + fmt("%.2e (mu .9) vs %.2e (mu .99)", coarse, fine));
  return out;
}

// ---------------------------------------------------------------------------
// 3. Three-neuron fixture.
// ---------------------------------------------------------------------------

std::size_t argmin_unit(const ScoreVector& sv) { return select_unit(sv); }

Outcome fixture_ordering() {
  Outcome out;
  const testing::ThreeNeuronFixture f;
  CriterionSpec ig;
  ig.kind = CriterionKind::IGp;
  const std::size_t by_l2 = argmin_unit(criterion_lp(f.net, 0, 2));
  const std::size_t by_ig = argmin_unit(criterion_ig(f.net, f.batch, 0, ig));
  out.require(by_l2 != by_ig, "L2 and IG pick the same neuron");
  const TrajectoryRecord rec = trajectory_log(f.net, f.batch, 0, by_ig, ig);
  const double decay = rec.points.back().grad_norm / rec.points.front().grad_norm;
  out.require(by_ig == f.c && decay < 1e-3, "IG does not pick the vanishing-gradient neuron");
  out.note("L2 picks " + std::to_string(by_l2) + ", IG picks " + std::to_string(by_ig) + ", its gradient falls to " +
           fmt("%.1e", decay) + " of start");
  return out;
}

// ---------------------------------------------------------------------------
// 4. Criterion ordering on benchmark B without fine-tuning.
// ---------------------------------------------------------------------------

Outcome criterion_ordering() {
  Outcome out;
  const ExperimentConfig cfg = benchmark_config("B");
  const BenchmarkData& data = benchmark_data("B");
  auto& cache = checkpoints("B");
  const std::vector<std::string> names{"IG2", "SG2", "L2xgrad2", "grad2", "L2"};
  const std::vector<double> targets{0.75, 0.85, 0.9};
  std::map<std::pair<double, std::string>, std::vector<double>> acc;
  for (std::uint64_t seed : seeds()) {
    const Network& start = cache(seed);
    for (double t : targets) {
      for (const auto& n : names) {
        PruneSchedule s = cfg.schedule;
        const CriterionSpec parsed = parse_criterion(n);
        s.criterion.kind = parsed.kind;
        s.criterion.p = parsed.p;
        s.rho_global = t;
        s.finetune_steps = 0;
        s.seed = seed;
        s.train.seed = seed;
        Pruner p(start, s, data.train);
        PruneResult r = p.run();
        acc[{t, n}].push_back(evaluate(r.net, data.eval));
        g_compaction.check(r, seed);
      }
    }
  }
  g_compaction_sources.insert(4);
  const double chance = 1.0 / static_cast<double>(data.train.n_classes);
  for (double t : targets) {
    auto m = [&](const std::string& n) { return mean(acc[{t, n}]); };
    const std::string at = fmt("%.0f%%", 100 * t);
    out.require(m("IG2") >= m("SG2"), at + ": IG2 < SG2");
    out.require(m("SG2") >= m("L2xgrad2"), at + ": SG2 < L2xgrad2");
    out.require(m("L2xgrad2") >= m("grad2"), at + ": L2xgrad2 < grad2");
    out.require(m("L2xgrad2") >= m("L2"), at + ": L2xgrad2 < L2");
    std::ostringstream line;
    line << at << " [";
    for (std::size_t i = 0; i < names.size(); ++i) line << (i ? " " : "") << names[i] << fmt("=%.3f", m(names[i]));
    line << "]";
    out.note(line.str());
  }
  const double l2 = mean(acc[{0.9, "L2"}]), ig = mean(acc[{0.9, "IG2"}]);
  out.require(std::abs(l2 - chance) <= 0.03, "90%: L2 " + fmt("%.3f not within 0.03 of chance %.3f", l2, chance));
  out.require(ig - chance >= 0.20, "90%: IG2 " + fmt("%.3f less than chance %.3f + 0.20", ig, chance));
  return out;
}

// ---------------------------------------------------------------------------
// 5. Entwined against post-pruning at equal budgets on benchmark A.
// ---------------------------------------------------------------------------

Outcome schedule_comparison() {
  Outcome out;
  const ExperimentConfig cfg = benchmark_config("A");
  const BenchmarkData& data = benchmark_data("A");
  auto& cache = checkpoints("A");
  const std::vector<std::size_t> budgets{200, 500, 1000};
  std::map<std::pair<std::size_t, ScheduleMode>, std::vector<double>> acc;
  for (std::uint64_t seed : seeds()) {
    const Network& start = cache(seed);
    for (std::size_t b : budgets) {
      for (ScheduleMode mode : {ScheduleMode::entwined, ScheduleMode::post_pruning}) {
        PruneSchedule s = cfg.schedule;
        s.rho_global = 0.9;
        s.mode = mode;
        s.finetune_budget = b;
        s.seed = seed;
        s.train.seed = seed;
        PruneResult r = Pruner(start, s, data.train).run();
        out.require(!r.report.aborted, "run aborted: " + r.report.abort_reason);
        acc[{b, mode}].push_back(evaluate(r.net, data.eval));
        g_compaction.check(r, seed);
      }
    }
  }
  g_compaction_sources.insert(5);
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    const double e = mean(acc[{budgets[i], ScheduleMode::entwined}]);
    const double p = mean(acc[{budgets[i], ScheduleMode::post_pruning}]);
    out.require(e >= p, std::to_string(budgets[i]) + " steps: entwined < post");
    out.note(std::to_string(budgets[i]) + fmt(" steps: entwined %.3f post %.3f", e, p));
    if (i > 0) {
      for (ScheduleMode mode : {ScheduleMode::entwined, ScheduleMode::post_pruning}) {
        const double prev = mean(acc[{budgets[i - 1], mode}]), cur = mean(acc[{budgets[i], mode}]);
        out.require(cur >= prev, std::string(to_string(mode)) + " decreases from " + std::to_string(budgets[i - 1]) +
                                     " to " + std::to_string(budgets[i]) + " steps");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 6. Half the parameters of the two-moons MLP go without loss.
// ---------------------------------------------------------------------------

Outcome lossless_pruning() {
  Outcome out;
  const ExperimentConfig cfg = benchmark_config("A");
  const BenchmarkData& data = benchmark_data("A");
  auto& cache = checkpoints("A");
  std::vector<double> base, pruned;
  for (std::uint64_t seed : seeds()) {
    const Network& start = cache(seed);
    base.push_back(evaluate(start, data.eval));
    PruneSchedule s = cfg.schedule;
    s.rho_global = 0.5;
    s.mode = ScheduleMode::entwined;
    s.finetune_steps = 25;
    s.seed = seed;
    s.train.seed = seed;
    PruneResult r = Pruner(start, s, data.train).run();
    out.require(!r.report.aborted, "run aborted: " + r.report.abort_reason);
    pruned.push_back(evaluate(r.net, data.eval));
    g_compaction.check(r, seed);
  }
  g_compaction_sources.insert(6);
  const double b = mean(base), p = mean(pruned);
  out.require(std::abs(p - b) <= 0.01, fmt("pruned %.4f vs checkpoint %.4f", p, b));
  out.note(fmt("checkpoint %.4f, pruned %.4f", b, p));
  return out;
}

// ---------------------------------------------------------------------------
// 7. Loop invariants: one scoring pass per removal, masks hold, budgets met,
// runs reproduce.
// ---------------------------------------------------------------------------

Outcome loop_invariants() {
  Outcome out;
  const ExperimentConfig cfg = benchmark_config("A");
  const BenchmarkData& data = benchmark_data("A");
  const Network& start = checkpoints("A")(0);
  PruneSchedule s = cfg.schedule;
  s.rho_global = 0.7;
  s.finetune_steps = 5;
  s.seed = 3;

  auto run_once = [&](std::size_t* hook_calls, std::size_t* mask_breaks) {
    Pruner p(start, s, data.train, &data.eval);
    p.set_step_hook([&](const Network& net, const PruneMask& mask) {
      ++*hook_calls;
      for (std::size_t l = 0; l < net.depth(); ++l) {
        const std::size_t units = net.layer(l).units();
        for (std::size_t i = 0; i < net.layer(l).weights.size(); ++i) {
          if (mask.neuron_removed(l, i % units) && net.layer(l).weights[i] != 0.0) ++*mask_breaks;
        }
        for (std::size_t n = 0; n < net.layer(l).units(); ++n) {
          if (mask.neuron_removed(l, n) && net.layer(l).bias[n] != 0.0) ++*mask_breaks;
        }
      }
    });
    return p.run();
  };
  std::size_t calls = 0, breaks = 0, calls2 = 0, breaks2 = 0;
  const PruneResult a = run_once(&calls, &breaks);
  const PruneResult b = run_once(&calls2, &breaks2);

  out.require(a.report.evaluations == a.report.removals, "evaluation count differs from removal count");
  out.require(calls == 5 * a.report.events.size() && calls > 0, "fine-tune hook count mismatch");
  out.require(breaks == 0, std::to_string(breaks) + " masked values non-zero after a fine-tune step");
  for (std::size_t l = 0; l + 1 < start.depth(); ++l) {
    const std::size_t allowed = allowed_live_params(start, l, a.report.budgets[l]);
    const std::size_t live = count_layer_params(a.net, a.mask, l);
    const std::size_t unit = start.layer(l).fan_in() + 1;
    out.require(live <= allowed, "layer " + std::to_string(l) + " over budget");
    out.require(live + unit > allowed, "layer " + std::to_string(l) + " pruned beyond one unit of its budget");
  }
  out.require(a.mask == b.mask, "masks differ between identical runs");
  out.require(to_json(a.report).dump() == to_json(b.report).dump(), "reports differ between identical runs");
  out.require(a.net.layer(0).weights == b.net.layer(0).weights, "weights differ between identical runs");
  std::size_t removed = 0;
  for (auto r : a.report.removals) removed += r;
  out.note(std::to_string(removed) + " removals, " + std::to_string(calls) + " fine-tune steps checked");
  return out;
}

// ---------------------------------------------------------------------------
// 8. Unstructured G=1 pruning against structured pruning on the same layer.
// ---------------------------------------------------------------------------

Outcome unstructured_mode() {
  Outcome out;
  const ExperimentConfig cfg = benchmark_config("B");
  const BenchmarkData& data = benchmark_data("B");
  auto& cache = checkpoints("B");
  const double total = static_cast<double>(cache(0).param_count());
  const Layer& first = cache(0).layer(0);
  const std::size_t depth = cache(0).depth();
  const double layer_params = static_cast<double>(first.param_count());
  const auto weights = static_cast<double>(first.weights.size());
  // 90% of the layer's weights; biases stay.
  const double removed_weights = std::ceil(0.9 * weights);
  const double rho_weights = removed_weights / layer_params;

  std::size_t wins = 0;
  bool deterministic = true;
  std::ostringstream accs;
  for (std::uint64_t seed : seeds()) {
    const Network& start = cache(seed);
    PruneSchedule u = cfg.schedule;
    u.criterion.kind = CriterionKind::LpTimesGradP;
    u.criterion.granularity = Granularity::weight;
    u.group_size = 1;
    u.finetune_steps = 0;
    u.strategy = BudgetStrategy::explicit_list;
    u.explicit_budgets.assign(depth, 0.0);
    u.explicit_budgets[0] = rho_weights;
    u.rho_global = rho_weights * layer_params / total;
    u.seed = seed;
    const PruneResult r1 = Pruner(start, u, data.train).run();
    const PruneResult r2 = Pruner(start, u, data.train).run();
    deterministic = deterministic && r1.mask == r2.mask;
    const std::size_t live = live_weights(r1.net, r1.mask, 0);
    out.require(weights - static_cast<double>(live) >= removed_weights, "unstructured run short of 90% weights");
    out.require(r1.report.removals[0] == static_cast<std::size_t>(removed_weights), "G=1 removal count mismatch");

    PruneSchedule st = u;
    st.criterion.granularity = Granularity::neuron;
    st.group_size = 0;
    st.explicit_budgets[0] = 0.9;
    st.rho_global = 0.9 * layer_params / total;
    const PruneResult rs = Pruner(start, st, data.train).run();
    g_compaction.check(rs, seed);

    const double au = evaluate(r1.net, data.eval), as = evaluate(rs.net, data.eval);
    wins += au > as;
    accs << (seed ? " " : "") << fmt("%.3f/%.3f", au, as);
  }
  out.require(deterministic, "G=1 masks differ between re-runs");
  out.require(wins >= 4, "unstructured wins only " + std::to_string(wins) + " of 5 seeds");
  out.note("unstructured/structured accuracy per seed: " + accs.str());
  return out;
}

// ---------------------------------------------------------------------------
// 9. Compaction equivalence over the structured runs above.
// ---------------------------------------------------------------------------

Outcome compaction() {
  Outcome out;
  out.require(g_compaction_sources.count(4) && g_compaction_sources.count(5) && g_compaction_sources.count(6),
              "structured runs of criteria 4-6 were not all executed");
  out.require(g_compaction.runs > 0 && g_compaction.failures == 0,
              std::to_string(g_compaction.failures) + " of " + std::to_string(g_compaction.runs) + " compactions differ");
  out.note(std::to_string(g_compaction.runs) + " structured runs, worst logit difference " +
           fmt("%.1e", g_compaction.worst));
  return out;
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;  // 0: no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N[,M...]]\n");
      return 2;
    }
  }
  // Compaction is checked on the runs of 4-6, so selecting 9 runs them too.
  if (only.count(9)) only.insert({4, 5, 6});

  const std::vector<Criterion> criteria{
      {1, "gradient oracle", 60, gradient_oracle},
      {2, "Riemann fidelity", 60, riemann_fidelity},
      {3, "three-neuron fixture ordering", 0, fixture_ordering},
      {4, "criterion ordering on B", 900, criterion_ordering},
      {5, "entwined vs post-pruning on A", 600, schedule_comparison},
      {6, "lossless 50% pruning on A", 0, lossless_pruning},
      {7, "pruning loop invariants", 0, loop_invariants},
      {8, "unstructured G=1 mode on B", 0, unstructured_mode},
      {9, "compaction equivalence", 0, compaction},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.require(false, fmt("took %.0f s, limit %.0f s", secs, c.limit_seconds));
    }
    failed += !o.pass;
    std::printf("criterion %d %s: %s (%.1f s) %s\n", c.id, c.title, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
