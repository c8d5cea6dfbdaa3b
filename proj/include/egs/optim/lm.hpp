#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace egs::optim {

struct LmOptions {
  int max_iterations = 500;
  double ftol = 1e-10;    // relative cost change on an accepted step
  double gtol = 1e-8;     // infinity norm of J^T r
  double xtol = 1e-14;    // relative step size
  double lambda0 = 1e-3;
  double lambda_factor = 10.0;
  double lambda_max = 1e16;
  int max_consecutive_rejections = 20;
  double cost_floor = 0.0;  // stop once cost <= cost_floor
};

/// Residual callback: fill r for parameters x, return false if the model
/// cannot be evaluated there (treated as a rejected step).
using ResidualFn = std::function<bool(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;
/// Jacobian callback: dr/dx at x, with r = residual(x) already known.
using JacobianFn = std::function<bool(const Eigen::VectorXd& x, const Eigen::VectorXd& r, Eigen::MatrixXd& jac)>;

struct LmProblem {
  ResidualFn residual;
  JacobianFn jacobian;
  Eigen::VectorXd lower;  // empty, or one bound per parameter; steps are clipped
  Eigen::VectorXd upper;
};

struct LmIterate {
  int iteration = 0;
  Eigen::VectorXd x;
  double cost = 0.0;  // sum of squared residuals
  double lambda = 0.0;
};

struct LmResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  double cost = 0.0;
  double initial_cost = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string reason;
  std::vector<LmIterate> trace;  // starting point, then every accepted step
};

/// Levenberg-Marquardt with Marquardt diagonal scaling. Each trial step
/// solves [J; sqrt(lambda) D] dx = [-r; 0] by column-pivoted QR on the
/// column-scaled system. Throws NumericalError if the start point cannot be
/// evaluated.
LmResult levenberg_marquardt(const LmProblem& problem, const Eigen::VectorXd& x0, const LmOptions& options = {});

}  // namespace egs::optim
