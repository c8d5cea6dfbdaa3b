#include "egs/calib/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include <Eigen/QR>

#include "egs/core/error.hpp"
#include "egs/core/parallel.hpp"
#include "egs/optim/lm.hpp"
#include "egs/sim/simulator.hpp"

namespace egs::calib {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(CalibParameter p) {
  switch (p) {
    case CalibParameter::KFz: return "k_fz";
    case CalibParameter::WellFactor: return "well_factor";
    case CalibParameter::PBhp: return "p_bhp";
    case CalibParameter::WellheadOffset: return "wellhead_temperature_offset";
  }
  return "?";
}

CalibParameter calib_parameter_from_string(std::string_view name) {
  for (auto p : {CalibParameter::KFz, CalibParameter::WellFactor, CalibParameter::PBhp,
                 CalibParameter::WellheadOffset}) {
    if (name == to_string(p)) return p;
  }
  if (name == "wellhead_offset") return CalibParameter::WellheadOffset;
  throw InputError("unknown calibration parameter '" + std::string(name) +
                   "' (expected k_fz, well_factor, p_bhp or wellhead_offset)");
}

double get(const sim::ReservoirConfig& cfg, CalibParameter p) {
  switch (p) {
    case CalibParameter::KFz: return cfg.k_fz;
    case CalibParameter::WellFactor: return cfg.well_factor;
    case CalibParameter::PBhp: return cfg.p_bhp;
    case CalibParameter::WellheadOffset: return cfg.wellhead_temperature_offset;
  }
  return 0.0;
}

void set(sim::ReservoirConfig& cfg, CalibParameter p, double value) {
  switch (p) {
    case CalibParameter::KFz: cfg.k_fz = value; break;
    case CalibParameter::WellFactor: cfg.well_factor = value; break;
    case CalibParameter::PBhp: cfg.p_bhp = value; break;
    case CalibParameter::WellheadOffset: cfg.wellhead_temperature_offset = value; break;
  }
}

FreeParameter default_free_parameter(CalibParameter p, const sim::ReservoirConfig& cfg) {
  FreeParameter f{.parameter = p, .initial = get(cfg, p), .lower = 0, .upper = 0, .log_space = false};
  switch (p) {
    case CalibParameter::KFz:
      f.lower = 1e-18, f.upper = 1e-12, f.log_space = true;
      break;
    case CalibParameter::WellFactor:
      f.lower = 1e-15, f.upper = 1e-10, f.log_space = true;
      break;
    case CalibParameter::PBhp:
      f.lower = 1e5, f.upper = 0.999 * cfg.initial_pressure;
      break;
    case CalibParameter::WellheadOffset:
      f.lower = -150.0, f.upper = 0.0;
      break;
  }
  return f;
}

void CalibrationProblem::validate() const {
  if (free.empty()) throw InputError("calibrate: no free parameters");
  if (observed.size() < 10) throw InputError("calibrate: need at least 10 observations");
  if (!(observed.back_time() > 0.0)) throw InputError("calibrate: observations must extend past t = 0");
  for (std::size_t i = 0; i < free.size(); ++i) {
    const auto& f = free[i];
    const auto name = std::string(to_string(f.parameter));
    for (std::size_t j = 0; j < i; ++j) {
      if (free[j].parameter == f.parameter) throw InputError("calibrate: " + name + " listed twice");
    }
    if (!(std::isfinite(f.lower) && std::isfinite(f.upper) && f.lower < f.upper)) {
      throw InputError("calibrate: " + name + " needs finite bounds with lower < upper");
    }
    if (!(f.initial >= f.lower && f.initial <= f.upper)) {
      throw InputError("calibrate: initial " + name + " outside its bounds");
    }
    if (f.log_space && !(f.lower > 0.0)) throw InputError("calibrate: log-space " + name + " needs positive bounds");
  }
  if (max_iterations < 1 || max_consecutive_rejections < 1 || !(fd_relative_step > 0.0)) {
    throw InputError("calibrate: bad optimizer settings");
  }
  base.validate();
}

core::TimeSeries simulate_at(const sim::ReservoirConfig& cfg, const core::TimeSeries& observed) {
  return sim::run(cfg, observed.back_time(), observed.times()).power;
}

namespace {

double to_search(const FreeParameter& f, double v) { return f.log_space ? std::log10(v) : v; }
double from_search(const FreeParameter& f, double u) { return f.log_space ? std::pow(10.0, u) : u; }

}  // namespace

CalibrationResult calibrate(const CalibrationProblem& problem) {
  problem.validate();
  const auto& free = problem.free;
  const auto n = static_cast<Eigen::Index>(free.size());
  const auto obs = problem.observed.values();
  const auto m = static_cast<Eigen::Index>(obs.size());
  std::atomic<int> simulations{0};

  auto config_at = [&](const VectorXd& u) {
    auto cfg = problem.base;
    for (Eigen::Index j = 0; j < n; ++j) set(cfg, free[static_cast<std::size_t>(j)].parameter,
                                             from_search(free[static_cast<std::size_t>(j)], u[j]));
    return cfg;
  };
  // Simulator or config failures make a point infeasible, never fatal.
  auto simulate = [&](const VectorXd& u, VectorXd& r) {
    ++simulations;
    try {
      const auto curve = simulate_at(config_at(u), problem.observed);
      r.resize(m);
      for (Eigen::Index i = 0; i < m; ++i) r[i] = curve.values()[static_cast<std::size_t>(i)] - obs[static_cast<std::size_t>(i)];
      return true;
    } catch (const Error&) {
      return false;
    }
  };

  optim::LmProblem lm;
  lm.lower.resize(n);
  lm.upper.resize(n);
  VectorXd u0(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& f = free[static_cast<std::size_t>(j)];
    lm.lower[j] = to_search(f, f.lower);
    lm.upper[j] = to_search(f, f.upper);
    u0[j] = to_search(f, f.initial);
  }
  lm.residual = simulate;

  MatrixXd last_jac;
  VectorXd last_jac_at;
  lm.jacobian = [&](const VectorXd& u, const VectorXd& r, MatrixXd& jac) {
    jac.resize(m, n);
    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    core::parallel_for(static_cast<std::size_t>(n), problem.workers, [&](std::size_t j) {
      const auto col = static_cast<Eigen::Index>(j);
      const double width = lm.upper[col] - lm.lower[col];
      double h = problem.fd_relative_step * (u[col] != 0.0 ? std::abs(u[col]) : width);
      if (u[col] + h > lm.upper[col]) h = -h;  // step back from the upper bound
      VectorXd up = u;
      up[col] += h;
      VectorXd rp;
      if (simulate(up, rp)) {
        jac.col(col) = (rp - r) / h;
        ok[j] = 1;
      }
    });
    if (std::find(ok.begin(), ok.end(), 0) != ok.end()) return false;
    last_jac = jac;
    last_jac_at = u;
    return true;
  };

  optim::LmOptions opt;
  opt.max_iterations = problem.max_iterations;
  opt.max_consecutive_rejections = problem.max_consecutive_rejections;
  const auto res = optim::levenberg_marquardt(lm, u0, opt);

  CalibrationResult out;
  out.free = free;
  for (Eigen::Index j = 0; j < n; ++j) out.values.push_back(from_search(free[static_cast<std::size_t>(j)], res.x[j]));
  out.config = config_at(res.x);
  const double md = static_cast<double>(m);
  out.initial_mse = res.initial_cost / md;
  for (const auto& it : res.trace) {
    TraceEntry e{.iteration = it.iteration, .values = {}, .mse = it.cost / md};
    for (Eigen::Index j = 0; j < n; ++j) e.values.push_back(from_search(free[static_cast<std::size_t>(j)], it.x[j]));
    out.trace.push_back(std::move(e));
  }
  std::vector<double> best(obs.size());
  for (std::size_t i = 0; i < best.size(); ++i) best[i] = obs[i] + res.residual[static_cast<Eigen::Index>(i)];
  out.best_fit = core::TimeSeries(std::vector<double>(problem.observed.times().begin(), problem.observed.times().end()),
                                  best, core::Quantity::PowerMW);
  try {
    out.metrics = core::compute_metrics(obs, best);
  } catch (const UndefinedR2Error&) {
    out.metrics.mse = res.cost / md;
    out.metrics.rmse = std::sqrt(out.metrics.mse);
    out.metrics.r2 = std::nan("");
    out.metrics.n = obs.size();
  }
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.reason = res.reason;

  MatrixXd jac;
  bool have_jac = last_jac_at.size() == n && last_jac_at == res.x;
  if (have_jac) {
    jac = last_jac;
  } else {
    have_jac = lm.jacobian(res.x, res.residual, jac);
  }
  if (have_jac && m > n) {
    const double sigma2 = res.cost / static_cast<double>(m - n);
    const MatrixXd jtj = jac.transpose() * jac;
    out.covariance = sigma2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
  }
  out.simulations = simulations.load();
  return out;
}

nlohmann::ordered_json to_json(const CalibrationResult& r) {
  using nlohmann::ordered_json;
  ordered_json doc;
  ordered_json params = ordered_json::array();
  for (std::size_t j = 0; j < r.free.size(); ++j) {
    const auto& f = r.free[j];
    params.push_back({{"name", to_string(f.parameter)},
                      {"value", r.values[j]},
                      {"initial", f.initial},
                      {"lower", f.lower},
                      {"upper", f.upper},
                      {"log_space", f.log_space}});
  }
  doc["parameters"] = params;
  auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
  doc["metrics"] = {{"r2", num(r.metrics.r2)},
                    {"mse", r.metrics.mse},
                    {"rmse", r.metrics.rmse},
                    {"initial_mse", r.initial_mse},
                    {"n", r.metrics.n}};
  doc["optimizer"] = {{"iterations", r.iterations},
                      {"simulations", r.simulations},
                      {"converged", r.converged},
                      {"reason", r.reason}};
  ordered_json trace = ordered_json::array();
  for (const auto& t : r.trace) trace.push_back({{"iteration", t.iteration}, {"values", t.values}, {"mse", t.mse}});
  doc["trace"] = trace;
  ordered_json cov = ordered_json::array();
  for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < r.covariance.cols(); ++j) row.push_back(num(r.covariance(i, j)));
    cov.push_back(row);
  }
  doc["covariance_search_space"] = cov;
  return doc;
}

}  // namespace egs::calib
