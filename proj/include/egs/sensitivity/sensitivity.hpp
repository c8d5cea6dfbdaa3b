#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "egs/core/parameters.hpp"
#include "egs/core/time_series.hpp"
#include "egs/sim/config.hpp"

namespace egs::sensitivity {

enum class Spacing { Linear, Log };

struct ParameterRange {
  core::Parameter parameter = core::Parameter::KFz;
  double lower = 0.0;
  double upper = 0.0;
  int count = 2;
  Spacing spacing = Spacing::Linear;

  /// Sample values; Log spacing is geometric. lower == upper gives `count`
  /// copies of the same value.
  std::vector<double> samples() const;
};

struct SweepPlan {
  core::ParameterSet base;
  std::vector<ParameterRange> ranges;  // at most one per parameter
  double horizon_days = 120.0;
  double output_step_days = 1.0;

  /// Throws InputError on counts < 2, non-positive log bounds, lower > upper,
  /// duplicate parameters or a range that neither contains nor abuts the
  /// base value (abutting means within 1e-9 relative of an end point).
  void validate() const;
};

/// k_fz 1e-16..1e-14 (7, log), well_factor 1.78e-13..5.62e-13 (5, log),
/// p_bhp 9.5..11 MPa (4), q_inj 7.5..8.5 kg/s (3), 120 days, around the
/// calibrated constant-injection base point.
SweepPlan default_plan();

/// JSON layout: {"base": {"k_fz":..,"well_factor":..,"p_bhp":..,"q_inj":..},
///   "horizon_days": 120, "output_step_days": 1,
///   "ranges": [{"parameter": "k_fz", "lower":.., "upper":.., "count": 7, "spacing": "log"}, ...]}
/// Missing keys fall back to default_plan().
SweepPlan plan_from_json(const nlohmann::ordered_json& doc);
SweepPlan load_plan(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const SweepPlan& plan);

struct SampleRun {
  double value = 0.0;
  std::optional<core::TimeSeries> power;  // empty if the run failed
  std::string error;
};

struct ParameterFamily {
  core::Parameter parameter = core::Parameter::KFz;
  std::vector<SampleRun> runs;
  std::optional<double> score;  // empty when fewer than 2 runs survived
};

struct SensitivityReport {
  std::vector<double> times;
  core::TimeSeries base_curve{{0.0}, {0.0}};
  double base_mean_mw = 0.0;
  std::vector<ParameterFamily> families;       // plan order
  std::vector<core::Parameter> ranking;         // scored families by descending score, then unranked ones
  std::vector<core::Parameter> unranked;
  int simulations = 0;                          // distinct simulator runs
};

/// Dimensionless spread max_t (max - min over the family) / |time-mean of the
/// base curve|. Falls back to the raw spread in MW when the base mean is 0.
double influence_score(const std::vector<std::vector<double>>& curves, double base_mean);

/// Ranks by descending score; ties keep the canonical parameter order.
std::vector<core::Parameter> rank(const std::vector<std::pair<core::Parameter, double>>& scores);

/// One simulation per distinct parameter point; families share runs whose
/// parameter sets coincide (the base point is simulated once). Runs are
/// distributed over `workers` threads; the report does not depend on it.
SensitivityReport run_sweep(const sim::ReservoirConfig& config, const SweepPlan& plan, int workers = 1);

/// One CSV per family named sweep_<parameter>.csv with columns time_days and
/// one per sample value (failed runs omitted). Returns the written paths.
std::vector<std::filesystem::path> export_curves(const SensitivityReport& report, const std::filesystem::path& dir);

nlohmann::ordered_json to_json(const SensitivityReport& report);

/// Largest |residual| of a least-squares line through (x, y), relative to
/// the largest |y|. Used for the injection-rate linearity check.
double linear_fit_deviation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace egs::sensitivity
