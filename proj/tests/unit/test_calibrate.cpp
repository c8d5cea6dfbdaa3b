#include <cmath>

#include <gtest/gtest.h>

#include "egs/calib/calibrate.hpp"
#include "egs/core/error.hpp"

namespace {

using namespace egs;
using calib::CalibParameter;

// Coarse and short so each simulation takes a few milliseconds.
sim::ReservoirConfig small() {
  sim::ReservoirConfig c;
  c.cells = {8, 8, 8};
  c.dt_days = 1.0;
  return c;
}

core::TimeSeries observe(const sim::ReservoirConfig& cfg, double days = 30.0) {
  const auto t = core::linspace_step(0.0, days, 1.0);
  return calib::simulate_at(cfg, core::TimeSeries(t, std::vector<double>(t.size(), 0.0)));
}

calib::CalibrationProblem problem_for(const sim::ReservoirConfig& truth, std::vector<CalibParameter> which,
                                      double factor) {
  calib::CalibrationProblem p;
  p.observed = observe(truth);
  p.base = truth;
  for (auto w : which) {
    if (w == CalibParameter::PBhp) {
      calib::set(p.base, w, calib::get(truth, w) / factor);
    } else {
      calib::set(p.base, w, calib::get(truth, w) * factor);
    }
    p.free.push_back(calib::default_free_parameter(w, p.base));
  }
  return p;
}

TEST(Calibrate, ParameterNames) {
  EXPECT_EQ(calib::calib_parameter_from_string("k_fz"), CalibParameter::KFz);
  EXPECT_EQ(calib::calib_parameter_from_string("wellhead_offset"), CalibParameter::WellheadOffset);
  EXPECT_THROW(calib::calib_parameter_from_string("porosity"), InputError);
}

TEST(Calibrate, ZeroResidualStartStopsImmediately) {
  const auto truth = small();
  auto p = problem_for(truth, {CalibParameter::KFz, CalibParameter::WellFactor, CalibParameter::PBhp}, 1.0);
  const auto r = calib::calibrate(p);
  EXPECT_LE(r.iterations, 2);
  EXPECT_TRUE(r.converged) << r.reason;
  EXPECT_NEAR(r.values[0], truth.k_fz, 1e-10 * truth.k_fz);
  EXPECT_NEAR(r.values[1], truth.well_factor, 1e-10 * truth.well_factor);
  EXPECT_NEAR(r.values[2], truth.p_bhp, 1e-10 * truth.p_bhp);
  EXPECT_LT(r.metrics.mse, 1e-20);  // log10/pow round trip moves k by an ulp
}

TEST(Calibrate, SingleParameterTraceIsMonotone) {
  const auto truth = small();
  const auto r = calib::calibrate(problem_for(truth, {CalibParameter::KFz}, 3.0));
  ASSERT_FALSE(r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].mse, r.trace[i - 1].mse);
  EXPECT_LE(r.metrics.mse, r.initial_mse);
  EXPECT_NEAR(r.values[0], truth.k_fz, 1e-3 * truth.k_fz);
  EXPECT_GT(r.metrics.r2, 0.9999);
}

TEST(Calibrate, TwinRecoveryOnCoarseGrid) {
  const auto truth = small();
  const auto r = calib::calibrate(
      problem_for(truth, {CalibParameter::KFz, CalibParameter::WellFactor, CalibParameter::PBhp}, 3.0));
  EXPECT_NEAR(r.values[0] / truth.k_fz, 1.0, 0.05);
  EXPECT_NEAR(r.values[1] / truth.well_factor, 1.0, 0.05);
  EXPECT_NEAR(r.values[2] / truth.p_bhp, 1.0, 0.05);
  EXPECT_GE(r.metrics.r2, 0.999);
  for (const auto& t : r.trace) {
    for (std::size_t j = 0; j < r.free.size(); ++j) {
      EXPECT_GE(t.values[j], r.free[j].lower);
      EXPECT_LE(t.values[j], r.free[j].upper);
    }
  }
  EXPECT_EQ(r.covariance.rows(), 3);
}

TEST(Calibrate, LogAndLinearSearchAgree) {
  const auto truth = small();
  auto log_problem = problem_for(truth, {CalibParameter::KFz}, 2.0);
  auto lin_problem = log_problem;
  lin_problem.free[0].log_space = false;
  lin_problem.free[0].lower = 1e-17;
  lin_problem.free[0].upper = 1e-13;
  const auto a = calib::calibrate(log_problem);
  const auto b = calib::calibrate(lin_problem);
  EXPECT_NEAR(a.metrics.r2, b.metrics.r2, 1e-3);
  EXPECT_NEAR(a.values[0] / b.values[0], 1.0, 1e-3);
}

TEST(Calibrate, WellheadOffsetAndSchedule) {
  auto truth = small();
  truth.wellhead_temperature_offset = -65.0;
  truth.injection.series = core::TimeSeries({0.0, 10.0, 30.0}, {7.5, 6.0, 8.0}, core::Quantity::MassFlowKgS);
  calib::CalibrationProblem p;
  p.observed = observe(truth);
  p.base = truth;
  p.base.wellhead_temperature_offset = -20.0;
  p.free = {calib::default_free_parameter(CalibParameter::WellheadOffset, p.base)};
  const auto r = calib::calibrate(p);
  EXPECT_NEAR(r.values[0], -65.0, 1e-4);
  EXPECT_EQ(r.config.wellhead_temperature_offset, r.values[0]);
}

TEST(Calibrate, ResultIsIndependentOfWorkerCount) {
  const auto truth = small();
  auto p = problem_for(truth, {CalibParameter::KFz, CalibParameter::PBhp}, 2.0);
  p.max_iterations = 4;
  const auto one = calib::calibrate(p);
  p.workers = 3;
  const auto three = calib::calibrate(p);
  EXPECT_EQ(one.values, three.values);
  EXPECT_EQ(calib::to_json(one).dump(), calib::to_json(three).dump());
}

TEST(Calibrate, Validation) {
  const auto truth = small();
  auto p = problem_for(truth, {CalibParameter::KFz}, 1.0);
  auto bad = p;
  bad.observed = core::TimeSeries({0, 1, 2}, {1, 2, 3});
  EXPECT_THROW(calib::calibrate(bad), InputError);
  bad = p;
  bad.free[0].lower = 1e-14;
  EXPECT_THROW(calib::calibrate(bad), InputError);
  bad = p;
  bad.free.push_back(bad.free[0]);
  EXPECT_THROW(calib::calibrate(bad), InputError);
  bad = p;
  bad.free.clear();
  EXPECT_THROW(calib::calibrate(bad), InputError);
  bad = p;
  bad.free[0].lower = -1.0;
  EXPECT_THROW(calib::calibrate(bad), InputError);
}

TEST(Calibrate, JsonCarriesTraceAndMetrics) {
  const auto truth = small();
  const auto r = calib::calibrate(problem_for(truth, {CalibParameter::KFz}, 1.5));
  const auto j = calib::to_json(r);
  EXPECT_EQ(j["parameters"][0]["name"], "k_fz");
  EXPECT_EQ(j["trace"].size(), r.trace.size());
  EXPECT_TRUE(j["metrics"].contains("r2"));
  EXPECT_TRUE(j["optimizer"]["converged"].is_boolean());
}

}  // namespace
