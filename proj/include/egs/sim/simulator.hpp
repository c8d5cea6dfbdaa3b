#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "egs/core/error.hpp"
#include "egs/core/time_series.hpp"
#include "egs/sim/config.hpp"

namespace egs::sim {

/// Structured grid with cell-centered unknowns, index = i + nx (j + ny k).
class Grid {
 public:
  explicit Grid(const ReservoirConfig& cfg);

  int nx() const { return n_[0]; }
  int ny() const { return n_[1]; }
  int nz() const { return n_[2]; }
  int size() const { return n_[0] * n_[1] * n_[2]; }
  const Vec3& spacing() const { return h_; }
  double cell_volume() const { return h_[0] * h_[1] * h_[2]; }

  int index(int i, int j, int k) const { return i + n_[0] * (j + n_[1] * k); }
  Vec3 center(int cell) const;
  /// Cell containing point p (faces belong to the upper cell, clamped).
  int locate(const Vec3& p) const;

 private:
  std::array<int, 3> n_;
  Vec3 h_;
};

struct State {
  Eigen::VectorXd pressure;     // Pa
  Eigen::VectorXd temperature;  // K
  double time = 0.0;            // s

  /// Throws NumericalError on non-finite entries or temperatures outside
  /// [t_inj - 1 K, t_init + 1 K].
  void check(const ReservoirConfig& cfg) const;
};

struct StepReport {
  double time_days = 0.0;
  int newton_iterations = 0;
  double mass_balance_residual = 0.0;    // |dM - net inflow dt| / M
  double energy_balance_residual = 0.0;  // |dE - net inflow dt| / E
  double production_rate = 0.0;          // kg/s, negative means backflow
  double production_temperature = 0.0;  // K, wellhead offset included
  double net_power_mw = 0.0;
};

/// Net power: c_p (m_prod T_prod - m_inj T_inj), in MW.
double net_power_mw(double m_prod, double t_prod, double m_inj, double t_inj, double c_p);

/// Production well mass rate for a producer-cell pressure, kg/s:
/// well_factor (k_fz / k_ref) rho (p - p_bhp) / mu.
double well_source(double p_cell, const ReservoirConfig& cfg);

struct RunResult {
  core::TimeSeries power;  // MW at the requested output times
  std::vector<StepReport> steps;
  State final_state;
  double max_temperature_excursion = 0.0;  // K outside [T_inj, T_init], worst cell and step
};

/// Backward-Euler two-point-flux simulator for single-phase flow with heat.
/// Per time step the mass equation is linear in P (density linearized in the
/// accumulation only), so it is solved first; the energy equation is then
/// linear in T given the face fluxes. Newton on the coupled system reduces
/// to these two solves because the Jacobian is block lower-triangular.
class Simulator {
 public:
  explicit Simulator(ReservoirConfig cfg);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  const ReservoirConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  int injector_cell() const { return inj_cell_; }
  int producer_cell() const { return prod_cell_; }
  bool in_fracture_zone(int cell) const { return fz_[static_cast<std::size_t>(cell)]; }

  /// Hydrostatic pressure anchored at the producer depth, uniform T.
  State initial_state() const;

  /// Per-cell backward-Euler residuals integrated over the step: kg and J.
  Eigen::VectorXd mass_residual(const State& prev, const State& next, double dt) const;
  Eigen::VectorXd energy_residual(const State& prev, const State& next, double dt) const;

  /// Mass flux across each interior face, kg/s, positive from the lower to
  /// the upper cell index. Faces are listed as (lower, upper) pairs.
  std::vector<std::pair<int, int>> faces() const;
  Eigen::VectorXd face_mass_fluxes(const State& s) const;
  Eigen::VectorXd face_heat_conduction(const State& s) const;  // W, same orientation

  double fluid_mass(const State& s) const;  // kg
  double energy(const State& s) const;      // J, relative to 0 K

  /// One accepted step of nominal size dt (s); halves internally on failure.
  std::pair<State, StepReport> newton_step(const State& prev, double dt);

  /// Integrates to t_end_days and samples power at output_times (days, within
  /// [0, t_end]) by linear interpolation between step ends.
  RunResult run(double t_end_days, std::span<const double> output_times);

 private:
  struct Impl;
  ReservoirConfig cfg_;
  Grid grid_;
  std::vector<bool> fz_;
  int inj_cell_ = 0;
  int prod_cell_ = 0;
  std::unique_ptr<Impl> impl_;

  bool try_step(const State& prev, double dt, State& next, StepReport& rep, std::string& why);
  StepReport describe(const State& s, double t_days) const;
};

/// Convenience wrappers that build a Simulator for a single call.
Eigen::VectorXd assemble_mass_residual(const State& prev, const State& next, const ReservoirConfig& cfg,
                                       double dt);
Eigen::VectorXd assemble_energy_residual(const State& prev, const State& next, const ReservoirConfig& cfg,
                                         double dt);
RunResult run(const ReservoirConfig& cfg, double t_end_days, std::span<const double> output_times);

void write_step_reports_csv(std::ostream& out, const std::vector<StepReport>& steps);

}  // namespace egs::sim
