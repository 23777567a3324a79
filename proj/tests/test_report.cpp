#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "igprune/report.hpp"

using namespace igprune;

namespace {

ExperimentRow row(const std::string& crit, double target, std::uint64_t seed, double acc, bool ok = true) {
  ExperimentRow r;
  r.experiment = "sweep";
  r.criterion = crit;
  r.mode = "entwined";
  r.target = target;
  r.seed = seed;
  r.accuracy = acc;
  r.params_removed_pct = 100.0 * target;
  r.flops_removed_pct = 90.0 * target;
  r.ok = ok;
  if (!ok) r.error = "diverged, at step 3";
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "igprune_report_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Aggregate, MeanAndSampleStdMatchRecomputation) {
  const std::vector<double> accs{0.7, 0.8, 0.95, 0.6, 0.85};
  std::vector<ExperimentRow> rows;
  for (std::size_t s = 0; s < accs.size(); ++s) rows.push_back(row("IG2", 0.5, s, accs[s]));
  const auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 1u);
  double mean = 0.0;
  for (double a : accs) mean += a / 5.0;
  double ss = 0.0;
  for (double a : accs) ss += (a - mean) * (a - mean);
  EXPECT_EQ(agg[0].n, 5u);
  EXPECT_NEAR(agg[0].accuracy_mean, mean, 1e-15);
  EXPECT_NEAR(agg[0].accuracy_std, std::sqrt(ss / 4.0), 1e-15);
  EXPECT_NEAR(agg[0].params_removed_pct_mean, 50.0, 1e-12);
  EXPECT_FALSE(agg[0].single_seed);
}

TEST(Aggregate, GroupsByCellInFirstSeenOrderAndFlagsSingleSeed) {
  std::vector<ExperimentRow> rows{row("SG2", 0.9, 0, 0.5), row("IG2", 0.9, 0, 0.6), row("SG2", 0.9, 1, 0.7)};
  const auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].criterion, "SG2");
  EXPECT_EQ(agg[0].n, 2u);
  EXPECT_NEAR(agg[0].accuracy_mean, 0.6, 1e-15);
  EXPECT_EQ(agg[1].criterion, "IG2");
  EXPECT_TRUE(agg[1].single_seed);
  EXPECT_TRUE(std::isnan(agg[1].accuracy_std));
}

TEST(Aggregate, FailedCellsAreCountedButExcluded) {
  std::vector<ExperimentRow> rows{row("L2", 0.5, 0, 0.8), row("L2", 0.5, 1, 0.0, false), row("L2", 0.5, 2, 0.6)};
  const auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 1u);
  EXPECT_EQ(agg[0].n, 2u);
  EXPECT_EQ(agg[0].failed, 1u);
  EXPECT_NEAR(agg[0].accuracy_mean, 0.7, 1e-15);
}

TEST(Csv, RowsAndSummaryHeadersAndEscaping) {
  std::vector<ExperimentRow> rows{row("IG2", 0.75, 3, 0.5), row("IG2", 0.75, 4, 0.25, false)};
  const auto rp = scratch("rows.csv");
  write_rows_csv(rows, rp);
  const std::string text = slurp(rp);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "experiment,criterion,mode,target,budget,seed,accuracy,params_removed_pct,flops_removed_pct,status,error");
  EXPECT_NE(text.find("sweep,IG2,entwined,0.75,0,3,0.5,75,"), std::string::npos);
  EXPECT_NE(text.find(",failed,diverged; at step 3\n"), std::string::npos);

  const auto sp = scratch("summary.csv");
  write_aggregate_csv(aggregate({row("IG2", 0.75, 0, 0.5)}), sp);
  const std::string summary = slurp(sp);
  EXPECT_NE(summary.find("sweep,IG2,entwined,0.75,0,1,0,0.5,,75,"), std::string::npos);
  EXPECT_EQ(summary.back(), '\n');
  EXPECT_EQ(summary[summary.size() - 2], '1');
}

TEST(Csv, LossCurveAndNonFiniteValuesLeftEmpty) {
  const auto p = scratch("loss.csv");
  write_loss_csv({2.0, 1.5, std::nan("")}, p);
  EXPECT_EQ(slurp(p), "step,loss\n0,2\n1,1.5\n2,\n");
}

TEST(Json, NonFiniteBecomesNull) {
  ExperimentRow r = row("L2", 0.5, 0, std::nan(""), false);
  const Json j = to_json(r);
  EXPECT_TRUE(j["accuracy"].is_null());
  EXPECT_EQ(j["status"], "failed");
  const Json a = to_json(aggregate({row("L2", 0.5, 0, 0.4)})[0]);
  EXPECT_TRUE(a["accuracy_std"].is_null());
  EXPECT_EQ(a["single_seed"], true);
}

TEST(Json, WriteCreatesParentDirectories) {
  const auto p = scratch("nested/deeper/out.json");
  std::filesystem::remove_all(p.parent_path());
  write_json(Json{{"a", 1}}, p);
  EXPECT_EQ(Json::parse(slurp(p))["a"], 1);
}
