#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "egs/core/parameters.hpp"
#include "egs/core/time_series.hpp"

namespace egs::sim {

using Vec3 = std::array<double, 3>;

/// Constant injection rate, or a kg/s series interpolated linearly and held
/// at its end values outside its time span.
struct InjectionSchedule {
  double constant_rate = 7.5;
  std::optional<core::TimeSeries> series;

  double rate_at(double t_days) const;
  bool operator==(const InjectionSchedule&) const = default;
};

/// Everything a run needs. SI units throughout; z is depth (positive down).
struct ReservoirConfig {
  Vec3 domain_size{1000, 1000, 1000};
  std::array<int, 3> cells{20, 20, 20};
  Vec3 fz_min{200, 200, 200};
  Vec3 fz_max{850, 850, 700};

  double k_matrix = 1e-18;
  double k_fz = 7.75e-16;
  double porosity_matrix = 1e-4;
  double porosity_fz = 0.1;

  double rock_density = 2716;
  double rock_heat_capacity = 803;
  double thermal_conductivity = 2.546;

  double fluid_density = 950;
  double fluid_heat_capacity = 4187;
  double fluid_viscosity = 1.5e-4;
  double fluid_compressibility = 4.5e-10;  // 1/Pa, accumulation term only
  double pore_compressibility = 0.0;       // 1/Pa, adds to fluid storage
  bool enthalpy_flow_work = false;         // H = c_p T + P/rho instead of c_p T

  double gravity = 9.80665;
  double injection_temperature = 298.15;
  double initial_pressure = 13.2e6;  // at the production cell depth
  double initial_temperature = 503.15;

  Vec3 injector{575, 575, 450};
  Vec3 producer{675, 500, 625};
  double well_factor = 3.163e-13;
  double p_bhp = 9.5e6;
  double well_reference_permeability = 1e-15;
  double wellhead_temperature_offset = 0.0;
  InjectionSchedule injection;
  /// Power reported at t = 0: the rate of the first implicit step (what the
  /// scheme integrates), or the instantaneous rate of the undrawn initial state.
  enum class InitialPower { FirstStep, InitialState } initial_power = InitialPower::FirstStep;

  double dt_days = 0.5;
  int max_halvings = 8;
  int max_newton_iterations = 10;

  /// Throws InputError naming the offending field.
  void validate() const;

  core::ParameterSet parameters() const;
  void apply(const core::ParameterSet& ps);

  bool operator==(const ReservoirConfig&) const = default;
};

/// Parses `key = value` lines ('#' starts a comment). Vector values take three
/// comma- or space-separated numbers. `injection_schedule` paths are resolved
/// against `base_dir`. Errors carry `source:line`.
ReservoirConfig parse_config(std::string_view text, const std::string& source = "<config>",
                             const std::filesystem::path& base_dir = {});
ReservoirConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config for every scalar field; a schedule series is
/// written as `injection_schedule = <schedule_path>` when given.
std::string format_config(const ReservoirConfig& cfg, const std::string& schedule_path = {});

}  // namespace egs::sim
