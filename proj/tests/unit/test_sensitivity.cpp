#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "egs/core/error.hpp"
#include "egs/sensitivity/sensitivity.hpp"

namespace {

using namespace egs;
using core::Parameter;
using sensitivity::ParameterRange;
using sensitivity::Spacing;

sim::ReservoirConfig small() {
  sim::ReservoirConfig c;
  c.cells = {8, 8, 8};
  c.dt_days = 1.0;
  return c;
}

sensitivity::SweepPlan short_plan() {
  auto p = sensitivity::default_plan();
  p.horizon_days = 20.0;
  return p;
}

TEST(Sensitivity, Samples) {
  const ParameterRange log{Parameter::KFz, 1e-16, 1e-14, 7, Spacing::Log};
  const auto s = log.samples();
  ASSERT_EQ(s.size(), 7u);
  EXPECT_EQ(s.front(), 1e-16);
  EXPECT_EQ(s.back(), 1e-14);
  EXPECT_NEAR(s[3], 1e-15, 1e-27);
  const ParameterRange lin{Parameter::PBhp, 9.5e6, 11e6, 4, Spacing::Linear};
  EXPECT_EQ(lin.samples(), (std::vector<double>{9.5e6, 10e6, 10.5e6, 11e6}));
}

TEST(Sensitivity, DefaultPlanShape) {
  const auto p = sensitivity::default_plan();
  p.validate();
  int runs = 0;
  for (const auto& r : p.ranges) runs += r.count;
  EXPECT_EQ(runs, 19);
  EXPECT_EQ(p.base, core::ParameterSet{});
}

TEST(Sensitivity, PlanValidation) {
  auto p = sensitivity::default_plan();
  p.ranges[0].count = 1;
  EXPECT_THROW(p.validate(), InputError);
  p = sensitivity::default_plan();
  p.ranges[2].lower = 10e6;  // base 9.5 MPa neither inside nor abutting
  EXPECT_THROW(p.validate(), InputError);
  p = sensitivity::default_plan();
  p.ranges.push_back(p.ranges[0]);
  EXPECT_THROW(p.validate(), InputError);
  p = sensitivity::default_plan();
  p.ranges[3].spacing = Spacing::Log;
  p.ranges[3].lower = 0.0;
  EXPECT_THROW(p.validate(), InputError);
}

TEST(Sensitivity, PlanJsonRoundTrip) {
  const auto p = sensitivity::default_plan();
  const auto back = sensitivity::plan_from_json(sensitivity::to_json(p));
  ASSERT_EQ(back.ranges.size(), 4u);
  EXPECT_EQ(back.ranges[1].upper, 5.62e-13);
  EXPECT_EQ(back.ranges[0].spacing, Spacing::Log);
  EXPECT_EQ(back.base, p.base);
  const auto partial = sensitivity::plan_from_json(nlohmann::ordered_json::parse(R"({"horizon_days": 30})"));
  EXPECT_EQ(partial.horizon_days, 30.0);
  EXPECT_EQ(partial.ranges.size(), 4u);
  EXPECT_THROW(sensitivity::plan_from_json(nlohmann::ordered_json::parse(R"({"horizon": 30})")), InputError);
  EXPECT_THROW(sensitivity::plan_from_json(nlohmann::ordered_json::parse(
                   R"({"ranges": [{"parameter": "porosity", "lower": 0, "upper": 1, "count": 2}]})")),
               InputError);
}

TEST(Sensitivity, ScoreAndRank) {
  EXPECT_DOUBLE_EQ(sensitivity::influence_score({{1, 2, 3}, {1, 5, 3}}, -2.0), 1.5);
  EXPECT_DOUBLE_EQ(sensitivity::influence_score({{1, 2, 3}, {1, 5, 3}}, 0.0), 3.0);
  const std::vector<std::pair<Parameter, double>> s = {
      {Parameter::KFz, 0.5}, {Parameter::WellFactor, 2.0}, {Parameter::PBhp, 0.0}, {Parameter::QInj, 1.0}};
  const auto order = sensitivity::rank(s);
  EXPECT_EQ(order, (std::vector<Parameter>{Parameter::WellFactor, Parameter::QInj, Parameter::KFz, Parameter::PBhp}));
  // Any strictly increasing transform of the scores keeps the order.
  auto t = s;
  for (auto& [p, v] : t) v = std::exp(3.0 * v) - 7.0;
  EXPECT_EQ(sensitivity::rank(t), order);
}

TEST(Sensitivity, CollapsedRangeScoresZeroAndRanksLast) {
  auto plan = short_plan();
  plan.ranges[0] = {Parameter::KFz, 7.75e-16, 7.75e-16, 3, Spacing::Log};
  const auto rep = sensitivity::run_sweep(small(), plan);
  EXPECT_EQ(*rep.families[0].score, 0.0);
  EXPECT_EQ(rep.ranking.back(), Parameter::KFz);
}

TEST(Sensitivity, SweepOnCoarseGrid) {
  const auto rep = sensitivity::run_sweep(small(), short_plan(), 2);
  ASSERT_EQ(rep.families.size(), 4u);
  EXPECT_EQ(rep.simulations, 18);
  EXPECT_EQ(rep.times.size(), 21u);
  for (const auto& f : rep.families) {
    ASSERT_TRUE(f.score.has_value());
    EXPECT_GE(*f.score, 0.0);
  }
  // A permutation of the four parameters.
  auto sorted = rep.ranking;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<Parameter>(core::kAllParameters.begin(), core::kAllParameters.end())));
  // Larger k_fz gives larger early power.
  const auto& k = rep.families[0].runs;
  for (std::size_t i = 1; i < k.size(); ++i) EXPECT_GT(k[i].power->values()[1], k[i - 1].power->values()[1]);
  // Power at day 1 is affine in q_inj.
  std::vector<double> q, p;
  for (const auto& r : rep.families[3].runs) {
    q.push_back(r.value);
    p.push_back(r.power->values()[1]);
  }
  EXPECT_LT(sensitivity::linear_fit_deviation(q, p), 0.02);
}

TEST(Sensitivity, DeterministicAcrossWorkerCounts) {
  auto plan = short_plan();
  plan.horizon_days = 5.0;
  const auto a = sensitivity::run_sweep(small(), plan, 1);
  const auto b = sensitivity::run_sweep(small(), plan, 3);
  EXPECT_EQ(sensitivity::to_json(a).dump(), sensitivity::to_json(b).dump());
  for (std::size_t f = 0; f < a.families.size(); ++f) {
    for (std::size_t s = 0; s < a.families[f].runs.size(); ++s) {
      EXPECT_EQ(*a.families[f].runs[s].power, *b.families[f].runs[s].power);
    }
  }
}

TEST(Sensitivity, ScheduleRejectsRateSweep) {
  auto cfg = small();
  cfg.injection.series = core::TimeSeries({0.0, 10.0}, {7.5, 8.0}, core::Quantity::MassFlowKgS);
  EXPECT_THROW(sensitivity::run_sweep(cfg, short_plan()), InputError);
}

TEST(Sensitivity, ExportCurves) {
  const auto dir = std::filesystem::temp_directory_path() / "egs_test_sweep";
  std::filesystem::remove_all(dir);
  auto plan = short_plan();
  plan.horizon_days = 4.0;
  const auto rep = sensitivity::run_sweep(small(), plan);
  const auto files = sensitivity::export_curves(rep, dir);
  ASSERT_EQ(files.size(), 4u);
  std::ifstream in(dir / "sweep_k_fz.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("time_days,k_fz=1e-16,", 0), 0u);
  int rows = 1;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, static_cast<int>(rep.times.size()) + 1);

  sensitivity::SensitivityReport empty;
  EXPECT_TRUE(sensitivity::export_curves(empty, dir / "none").empty());
  EXPECT_FALSE(std::filesystem::exists(dir / "none"));
  std::filesystem::remove_all(dir);
}

TEST(Sensitivity, LinearFitDeviation) {
  EXPECT_NEAR(sensitivity::linear_fit_deviation({1, 2, 3}, {2, 4, 6}), 0.0, 1e-15);
  EXPECT_GT(sensitivity::linear_fit_deviation({1, 2, 3}, {0, 1, 0}), 0.1);
  EXPECT_THROW(sensitivity::linear_fit_deviation({1}, {1}), InputError);
}

}  // namespace
