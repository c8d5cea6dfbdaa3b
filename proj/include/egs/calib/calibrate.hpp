#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "egs/core/metrics.hpp"
#include "egs/core/time_series.hpp"
#include "egs/sim/config.hpp"

namespace egs::calib {

enum class CalibParameter { KFz, WellFactor, PBhp, WellheadOffset };

std::string_view to_string(CalibParameter p);
CalibParameter calib_parameter_from_string(std::string_view name);  // InputError on unknown names

double get(const sim::ReservoirConfig& cfg, CalibParameter p);
void set(sim::ReservoirConfig& cfg, CalibParameter p, double value);

struct FreeParameter {
  CalibParameter parameter = CalibParameter::KFz;
  double initial = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool log_space = false;  // search over log10 of the value
};

/// Default bounds and search space for one parameter, with `initial` taken
/// from the config: k_fz [1e-18, 1e-12] and well_factor [1e-15, 1e-10] in
/// log10, p_bhp [1e5 Pa, initial pressure), wellhead offset [-150, 0] K.
FreeParameter default_free_parameter(CalibParameter p, const sim::ReservoirConfig& cfg);

struct CalibrationProblem {
  core::TimeSeries observed{{0.0}, {0.0}};  // power, MW
  std::vector<FreeParameter> free;    // at least one
  sim::ReservoirConfig base;          // carries the injection schedule
  int max_iterations = 100;
  int max_consecutive_rejections = 5;
  double fd_relative_step = 1e-3;     // times |search coordinate|, or the bound width at 0
  int workers = 1;                    // concurrent finite-difference runs

  /// Throws InputError on bad bounds, too few observations or observation
  /// times outside what a run can reach.
  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  std::vector<double> values;  // natural units, order of `free`
  double mse = 0.0;
};

struct CalibrationResult {
  std::vector<FreeParameter> free;
  std::vector<double> values;  // optimum, natural units
  sim::ReservoirConfig config;  // base with the optimum applied
  double initial_mse = 0.0;
  core::FitMetrics metrics;     // of the best-fit curve against the observations
  std::vector<TraceEntry> trace;
  core::TimeSeries best_fit{{0.0}, {0.0}};
  int iterations = 0;
  int simulations = 0;
  bool converged = false;
  std::string reason;
  /// sigma^2 (J^T J)^-1 in search coordinates; reported, not validated.
  Eigen::MatrixXd covariance;
};

/// Levenberg-Marquardt over simulator runs. Throws NumericalError if the
/// start point cannot be simulated.
CalibrationResult calibrate(const CalibrationProblem& problem);

/// Simulated power at the observation times for the given config.
core::TimeSeries simulate_at(const sim::ReservoirConfig& cfg, const core::TimeSeries& observed);

nlohmann::ordered_json to_json(const CalibrationResult& result);

}  // namespace egs::calib
