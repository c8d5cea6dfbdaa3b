#include "egs/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/IterativeLinearSolvers>

#include "egs/core/csv.hpp"

namespace egs::sim {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

namespace {

constexpr double kSecondsPerDay = 86400.0;

struct Face {
  int a = 0, b = 0;         // a < b
  double flow_t = 0.0;      // rho/mu * k_h A / d   [kg/(s Pa)]
  double heat_t = 0.0;      // kappa A / d          [W/K]
  double grav_dphi = 0.0;   // rho g (z_b - z_a)    [Pa]
};

}  // namespace

Grid::Grid(const ReservoirConfig& cfg) : n_(cfg.cells) {
  for (int a = 0; a < 3; ++a) h_[a] = cfg.domain_size[a] / n_[a];
}

Vec3 Grid::center(int cell) const {
  const int i = cell % n_[0];
  const int j = (cell / n_[0]) % n_[1];
  const int k = cell / (n_[0] * n_[1]);
  return {(i + 0.5) * h_[0], (j + 0.5) * h_[1], (k + 0.5) * h_[2]};
}

int Grid::locate(const Vec3& p) const {
  std::array<int, 3> ijk{};
  for (int a = 0; a < 3; ++a) {
    ijk[a] = std::clamp(static_cast<int>(std::floor(p[a] / h_[a])), 0, n_[a] - 1);
  }
  return index(ijk[0], ijk[1], ijk[2]);
}

void State::check(const ReservoirConfig& cfg) const {
  const double lo = cfg.injection_temperature - 1.0;
  const double hi = cfg.initial_temperature + 1.0;
  for (Eigen::Index i = 0; i < pressure.size(); ++i) {
    if (!std::isfinite(pressure[i]) || !std::isfinite(temperature[i])) {
      throw NumericalError("non-finite state in cell " + std::to_string(i));
    }
    if (temperature[i] < lo || temperature[i] > hi) {
      throw NumericalError("temperature " + core::format_double(temperature[i]) + " K in cell " +
                           std::to_string(i) + " leaves the admissible window");
    }
  }
}

double net_power_mw(double m_prod, double t_prod, double m_inj, double t_inj, double c_p) {
  return c_p * (m_prod * t_prod - m_inj * t_inj) / 1e6;
}

double well_source(double p_cell, const ReservoirConfig& cfg) {
  return cfg.well_factor * (cfg.k_fz / cfg.well_reference_permeability) * cfg.fluid_density *
         (p_cell - cfg.p_bhp) / cfg.fluid_viscosity;
}

struct Simulator::Impl {
  std::vector<Face> faces;
  VectorXd storage0;     // phi V rho_ref                  [kg]
  VectorXd storage_dp;   // phi V rho_ref c_t              [kg/Pa]
  VectorXd rock_heat;    // (1 - phi) V rho_r c_r          [J/K]
  VectorXd depth;        // cell-center z                  [m]
  double well_index = 0.0;  // d(q_prod)/dP                 [kg/(s Pa)]
  std::map<double, std::unique_ptr<Eigen::SimplicialLDLT<SpMat>>> pressure_solvers;
  // Heat capacity dominates the diagonal by orders of magnitude, so a Jacobi
  // preconditioned Krylov solve converges in a handful of iterations.
  Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> energy_solver;

  double mass_of(int i, double p, double p_ref) const {
    return storage0[i] + storage_dp[i] * (p - p_ref);
  }
};

Simulator::Simulator(ReservoirConfig cfg) : cfg_(std::move(cfg)), grid_(cfg_), impl_(std::make_unique<Impl>()) {
  cfg_.validate();
  const int n = grid_.size();
  fz_.resize(static_cast<std::size_t>(n));
  auto& m = *impl_;
  m.storage0.resize(n);
  m.storage_dp.resize(n);
  m.rock_heat.resize(n);
  m.depth.resize(n);
  std::vector<double> perm(static_cast<std::size_t>(n));
  const double vol = grid_.cell_volume();
  const double c_t = cfg_.fluid_compressibility + cfg_.pore_compressibility;
  for (int c = 0; c < n; ++c) {
    const auto x = grid_.center(c);
    bool in = true;
    for (int a = 0; a < 3; ++a) in = in && x[a] > cfg_.fz_min[a] && x[a] < cfg_.fz_max[a];
    fz_[static_cast<std::size_t>(c)] = in;
    const double phi = in ? cfg_.porosity_fz : cfg_.porosity_matrix;
    perm[static_cast<std::size_t>(c)] = in ? cfg_.k_fz : cfg_.k_matrix;
    m.storage0[c] = phi * vol * cfg_.fluid_density;
    m.storage_dp[c] = m.storage0[c] * c_t;
    m.rock_heat[c] = (1.0 - phi) * vol * cfg_.rock_density * cfg_.rock_heat_capacity;
    m.depth[c] = x[2];
  }
  inj_cell_ = grid_.locate(cfg_.injector);
  prod_cell_ = grid_.locate(cfg_.producer);

  const auto& h = grid_.spacing();
  const double rho_mu = cfg_.fluid_density / cfg_.fluid_viscosity;
  for (int k = 0; k < grid_.nz(); ++k) {
    for (int j = 0; j < grid_.ny(); ++j) {
      for (int i = 0; i < grid_.nx(); ++i) {
        const int a = grid_.index(i, j, k);
        const std::array<int, 3> next = {i + 1 < grid_.nx() ? grid_.index(i + 1, j, k) : -1,
                                         j + 1 < grid_.ny() ? grid_.index(i, j + 1, k) : -1,
                                         k + 1 < grid_.nz() ? grid_.index(i, j, k + 1) : -1};
        for (int ax = 0; ax < 3; ++ax) {
          const int b = next[static_cast<std::size_t>(ax)];
          if (b < 0) continue;
          const double area = vol / h[ax];
          const double ka = perm[static_cast<std::size_t>(a)], kb = perm[static_cast<std::size_t>(b)];
          const double k_h = 2.0 * ka * kb / (ka + kb);
          Face f;
          f.a = a;
          f.b = b;
          f.flow_t = rho_mu * k_h * area / h[ax];
          f.heat_t = cfg_.thermal_conductivity * area / h[ax];
          f.grav_dphi = cfg_.fluid_density * cfg_.gravity * (m.depth[b] - m.depth[a]);
          m.faces.push_back(f);
        }
      }
    }
  }
  m.well_index = cfg_.well_factor * (cfg_.k_fz / cfg_.well_reference_permeability) * rho_mu;
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

State Simulator::initial_state() const {
  State s;
  const int n = grid_.size();
  s.pressure.resize(n);
  s.temperature.setConstant(n, cfg_.initial_temperature);
  const double z_ref = impl_->depth[prod_cell_];
  for (int c = 0; c < n; ++c) {
    s.pressure[c] = cfg_.initial_pressure + cfg_.fluid_density * cfg_.gravity * (impl_->depth[c] - z_ref);
  }
  return s;
}

std::vector<std::pair<int, int>> Simulator::faces() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(impl_->faces.size());
  for (const auto& f : impl_->faces) out.emplace_back(f.a, f.b);
  return out;
}

VectorXd Simulator::face_mass_fluxes(const State& s) const {
  VectorXd out(static_cast<Eigen::Index>(impl_->faces.size()));
  for (std::size_t f = 0; f < impl_->faces.size(); ++f) {
    const auto& fc = impl_->faces[f];
    out[static_cast<Eigen::Index>(f)] = fc.flow_t * (s.pressure[fc.a] - s.pressure[fc.b] + fc.grav_dphi);
  }
  return out;
}

VectorXd Simulator::face_heat_conduction(const State& s) const {
  VectorXd out(static_cast<Eigen::Index>(impl_->faces.size()));
  for (std::size_t f = 0; f < impl_->faces.size(); ++f) {
    const auto& fc = impl_->faces[f];
    out[static_cast<Eigen::Index>(f)] = fc.heat_t * (s.temperature[fc.a] - s.temperature[fc.b]);
  }
  return out;
}

double Simulator::fluid_mass(const State& s) const {
  double total = 0.0;
  for (int c = 0; c < grid_.size(); ++c) total += impl_->mass_of(c, s.pressure[c], cfg_.initial_pressure);
  return total;
}

double Simulator::energy(const State& s) const {
  double total = 0.0;
  const double cp = cfg_.fluid_heat_capacity;
  for (int c = 0; c < grid_.size(); ++c) {
    total += (impl_->mass_of(c, s.pressure[c], cfg_.initial_pressure) * cp + impl_->rock_heat[c]) * s.temperature[c];
  }
  return total;
}

VectorXd Simulator::mass_residual(const State& prev, const State& next, double dt) const {
  const auto& m = *impl_;
  const int n = grid_.size();
  VectorXd r(n);
  const double p_ref = cfg_.initial_pressure;
  for (int c = 0; c < n; ++c) r[c] = m.mass_of(c, next.pressure[c], p_ref) - m.mass_of(c, prev.pressure[c], p_ref);
  const VectorXd flux = face_mass_fluxes(next);
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const double q = dt * flux[static_cast<Eigen::Index>(f)];
    r[m.faces[f].a] += q;
    r[m.faces[f].b] -= q;
  }
  r[inj_cell_] -= dt * cfg_.injection.rate_at(next.time / kSecondsPerDay);
  r[prod_cell_] += dt * well_source(next.pressure[prod_cell_], cfg_);
  for (int c = 0; c < n; ++c) {
    if (!std::isfinite(r[c])) throw NumericalError("non-finite mass residual in cell " + std::to_string(c));
  }
  return r;
}

VectorXd Simulator::energy_residual(const State& prev, const State& next, double dt) const {
  const auto& m = *impl_;
  const int n = grid_.size();
  const double cp = cfg_.fluid_heat_capacity;
  const double p_ref = cfg_.initial_pressure;
  const double work = cfg_.enthalpy_flow_work ? 1.0 / cfg_.fluid_density : 0.0;
  const auto enthalpy = [&](const State& s, int c) { return cp * s.temperature[c] + work * s.pressure[c]; };
  VectorXd r(n);
  for (int c = 0; c < n; ++c) {
    const double e_new = (m.mass_of(c, next.pressure[c], p_ref) * cp + m.rock_heat[c]) * next.temperature[c];
    const double e_old = (m.mass_of(c, prev.pressure[c], p_ref) * cp + m.rock_heat[c]) * prev.temperature[c];
    r[c] = e_new - e_old;
  }
  const VectorXd flux = face_mass_fluxes(next);
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& fc = m.faces[f];
    const double F = flux[static_cast<Eigen::Index>(f)];
    const double h_up = F >= 0.0 ? enthalpy(next, fc.a) : enthalpy(next, fc.b);
    const double q = dt * (F * h_up + fc.heat_t * (next.temperature[fc.a] - next.temperature[fc.b]));
    r[fc.a] += q;
    r[fc.b] -= q;
  }
  const double q_inj = cfg_.injection.rate_at(next.time / kSecondsPerDay);
  r[inj_cell_] -= dt * q_inj * (cp * cfg_.injection_temperature + work * next.pressure[inj_cell_]);
  r[prod_cell_] += dt * well_source(next.pressure[prod_cell_], cfg_) * enthalpy(next, prod_cell_);
  for (int c = 0; c < n; ++c) {
    if (!std::isfinite(r[c])) throw NumericalError("non-finite energy residual in cell " + std::to_string(c));
  }
  return r;
}

StepReport Simulator::describe(const State& s, double t_days) const {
  StepReport rep;
  rep.time_days = t_days;
  rep.production_rate = well_source(s.pressure[prod_cell_], cfg_);
  rep.production_temperature = s.temperature[prod_cell_] + cfg_.wellhead_temperature_offset;
  rep.net_power_mw = net_power_mw(rep.production_rate, rep.production_temperature, cfg_.injection.rate_at(t_days),
                                  cfg_.injection_temperature, cfg_.fluid_heat_capacity);
  return rep;
}

bool Simulator::try_step(const State& prev, double dt, State& next, StepReport& rep, std::string& why) {
  auto& m = *impl_;
  const int n = grid_.size();
  const double p_ref = cfg_.initial_pressure;
  const double cp = cfg_.fluid_heat_capacity;

  auto& solver = m.pressure_solvers[dt];
  if (!solver) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(n) + 4 * m.faces.size() + 1);
    for (int c = 0; c < n; ++c) trip.emplace_back(c, c, m.storage_dp[c]);
    for (const auto& f : m.faces) {
      const double t = dt * f.flow_t;
      trip.emplace_back(f.a, f.a, t);
      trip.emplace_back(f.b, f.b, t);
      trip.emplace_back(f.a, f.b, -t);
      trip.emplace_back(f.b, f.a, -t);
    }
    trip.emplace_back(prod_cell_, prod_cell_, dt * m.well_index);
    SpMat a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    solver = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(a);
    if (solver->info() != Eigen::Success) {
      solver.reset();
      why = "pressure matrix factorization failed";
      return false;
    }
  }

  next = prev;
  next.time = prev.time + dt;
  const double mass_scale = m.storage0.maxCoeff();
  const double work = cfg_.enthalpy_flow_work ? 1.0 / cfg_.fluid_density : 0.0;
  std::ostringstream history;
  history << std::setprecision(3);
  for (int it = 1; it <= cfg_.max_newton_iterations; ++it) {
    // Pressure update: the mass residual is affine in P with the cached matrix.
    const VectorXd rm = mass_residual(prev, next, dt);
    const VectorXd dp = solver->solve(-rm);
    if (!dp.allFinite()) {
      why = "pressure solve produced non-finite values";
      return false;
    }
    next.pressure += dp;

    // Temperature update with fluxes frozen at the new pressure.
    const VectorXd flux = face_mass_fluxes(next);
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(n) + 4 * m.faces.size() + 1);
    for (int c = 0; c < n; ++c) {
      trip.emplace_back(c, c, m.mass_of(c, next.pressure[c], p_ref) * cp + m.rock_heat[c]);
    }
    for (std::size_t f = 0; f < m.faces.size(); ++f) {
      const auto& fc = m.faces[f];
      const double F = dt * flux[static_cast<Eigen::Index>(f)] * cp;
      const double k = dt * fc.heat_t;
      trip.emplace_back(fc.a, fc.a, k);
      trip.emplace_back(fc.b, fc.b, k);
      trip.emplace_back(fc.a, fc.b, -k);
      trip.emplace_back(fc.b, fc.a, -k);
      if (F >= 0.0) {
        trip.emplace_back(fc.a, fc.a, F);
        trip.emplace_back(fc.b, fc.a, -F);
      } else {
        trip.emplace_back(fc.a, fc.b, F);
        trip.emplace_back(fc.b, fc.b, -F);
      }
    }
    trip.emplace_back(prod_cell_, prod_cell_, dt * well_source(next.pressure[prod_cell_], cfg_) * cp);
    SpMat a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    m.energy_solver.setTolerance(1e-14);
    m.energy_solver.setMaxIterations(500);
    m.energy_solver.compute(a);
    const VectorXd re = energy_residual(prev, next, dt);
    const VectorXd dtemp = m.energy_solver.solve(-re);
    if (m.energy_solver.info() != Eigen::Success || !dtemp.allFinite()) {
      why = "energy solve failed";
      return false;
    }
    next.temperature += dtemp;

    const VectorXd rm2 = mass_residual(prev, next, dt);
    const VectorXd re2 = energy_residual(prev, next, dt);
    double energy_scale = 0.0;
    for (int c = 0; c < n; ++c) {
      energy_scale = std::max(energy_scale, (m.mass_of(c, next.pressure[c], p_ref) * cp + m.rock_heat[c]) *
                                                std::abs(next.temperature[c]));
    }
    const double abs_m = rm2.lpNorm<Eigen::Infinity>(), abs_e = re2.lpNorm<Eigen::Infinity>();
    const double rel_m = abs_m / mass_scale, rel_e = abs_e / energy_scale;
    history << " [" << it << ": mass " << rel_m << ", energy " << rel_e << "]";
    const bool mass_ok = rel_m <= 1e-8 || abs_m <= 1e-6;
    const bool energy_ok = rel_e <= 1e-8 || abs_e <= 1e-6;
    if (mass_ok && energy_ok) {
      rep = describe(next, next.time / kSecondsPerDay);
      rep.newton_iterations = it;
      // Global balances: interior fluxes cancel, only the wells remain.
      const double q_inj = cfg_.injection.rate_at(next.time / kSecondsPerDay);
      const double q_prod = well_source(next.pressure[prod_cell_], cfg_);
      const double m_new = fluid_mass(next), m_old = fluid_mass(prev);
      rep.mass_balance_residual = std::abs((m_new - m_old) - dt * (q_inj - q_prod)) / m_new;
      const double h_inj = cp * cfg_.injection_temperature + work * next.pressure[inj_cell_];
      const double h_prod = cp * next.temperature[prod_cell_] + work * next.pressure[prod_cell_];
      const double e_new = energy(next), e_old = energy(prev);
      rep.energy_balance_residual = std::abs((e_new - e_old) - dt * (q_inj * h_inj - q_prod * h_prod)) / e_new;
      return true;
    }
  }
  why = "Newton did not converge; residual history:" + history.str();
  return false;
}

std::pair<State, StepReport> Simulator::newton_step(const State& prev, double dt) {
  if (!(dt > 0.0)) throw InputError("time step must be > 0");
  const double target = prev.time + dt;
  State cur = prev;
  StepReport total;
  double h = dt;
  int halvings = 0;
  std::string log;
  while (cur.time < target) {
    const double step = std::min(h, target - cur.time);
    State next;
    StepReport rep;
    std::string why;
    bool ok = false;
    try {
      ok = try_step(cur, step, next, rep, why);
    } catch (const NumericalError& e) {
      why = e.what();
    }
    if (!ok) {
      log += "\n  dt = " + core::format_double(step) + " s: " + why;
      if (++halvings > cfg_.max_halvings) {
        throw NumericalError("time step failed after " + std::to_string(cfg_.max_halvings) + " halvings:" + log);
      }
      h = step / 2;
      continue;
    }
    const double iters = total.newton_iterations + rep.newton_iterations;
    const double mres = std::max(total.mass_balance_residual, rep.mass_balance_residual);
    const double eres = std::max(total.energy_balance_residual, rep.energy_balance_residual);
    total = rep;
    total.newton_iterations = static_cast<int>(iters);
    total.mass_balance_residual = mres;
    total.energy_balance_residual = eres;
    cur = std::move(next);
    // Land exactly on the target despite rounding in the accumulated time.
    if (target - cur.time < 1e-9 * dt) cur.time = target;
  }
  return {std::move(cur), total};
}

RunResult Simulator::run(double t_end_days, std::span<const double> output_times) {
  if (!(t_end_days > 0.0)) throw InputError("t_end must be > 0");
  if (output_times.empty()) throw InputError("no output times requested");
  for (double t : output_times) {
    if (!(t >= 0.0 && t <= t_end_days * (1 + 1e-12))) {
      throw InputError("output time " + core::format_double(t) + " outside [0, t_end]");
    }
  }
  State s = initial_state();
  s.check(cfg_);
  std::vector<StepReport> steps;
  double excursion = 0.0;
  std::vector<double> t_knots = {0.0};
  std::vector<double> p_knots = {describe(s, 0.0).net_power_mw};
  const double t_end = t_end_days * kSecondsPerDay;
  const double dt = cfg_.dt_days * kSecondsPerDay;
  const double t_lo = cfg_.injection_temperature, t_hi = cfg_.initial_temperature;
  while (s.time < t_end * (1 - 1e-12)) {
    const double step = std::min(dt, t_end - s.time);
    auto [next, rep] = newton_step(s, step);
    if (t_end - next.time < 1e-9 * dt) next.time = t_end;
    next.check(cfg_);
    rep.time_days = next.time / kSecondsPerDay;
    for (Eigen::Index c = 0; c < next.temperature.size(); ++c) {
      const double tc = next.temperature[c];
      excursion = std::max({excursion, tc - t_hi, t_lo - tc});
    }
    t_knots.push_back(rep.time_days);
    p_knots.push_back(rep.net_power_mw);
    steps.push_back(rep);
    s = std::move(next);
  }
  if (cfg_.initial_power == ReservoirConfig::InitialPower::FirstStep) p_knots.front() = p_knots[1];
  t_knots.back() = std::max(t_knots.back(), t_end_days);
  const core::TimeSeries knots(std::move(t_knots), std::move(p_knots), core::Quantity::PowerMW);
  std::vector<double> times(output_times.begin(), output_times.end());
  for (auto& t : times) t = std::min(t, t_end_days);
  auto values = core::resample_linear(knots, times);
  return RunResult{core::TimeSeries(std::move(times), std::move(values), core::Quantity::PowerMW),
                   std::move(steps), std::move(s), excursion};
}

VectorXd assemble_mass_residual(const State& prev, const State& next, const ReservoirConfig& cfg, double dt) {
  return Simulator(cfg).mass_residual(prev, next, dt);
}

VectorXd assemble_energy_residual(const State& prev, const State& next, const ReservoirConfig& cfg, double dt) {
  return Simulator(cfg).energy_residual(prev, next, dt);
}

RunResult run(const ReservoirConfig& cfg, double t_end_days, std::span<const double> output_times) {
  return Simulator(cfg).run(t_end_days, output_times);
}

void write_step_reports_csv(std::ostream& out, const std::vector<StepReport>& steps) {
  using core::format_double;
  out << "time_days,newton_iterations,mass_balance_residual,energy_balance_residual,production_rate_kg_s,"
         "production_temperature_k,net_power_mw\n";
  for (const auto& s : steps) {
    out << format_double(s.time_days) << ',' << s.newton_iterations << ',' << format_double(s.mass_balance_residual)
        << ',' << format_double(s.energy_balance_residual) << ',' << format_double(s.production_rate) << ','
        << format_double(s.production_temperature) << ',' << format_double(s.net_power_mw) << '\n';
  }
}

}  // namespace egs::sim
