#include "egs/optim/lm.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "egs/core/error.hpp"

namespace egs::optim {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd clip(const VectorXd& x, const LmProblem& p) {
  if (p.lower.size() == 0) return x;
  return x.cwiseMax(p.lower).cwiseMin(p.upper);
}

bool evaluate(const LmProblem& p, const VectorXd& x, VectorXd& r) {
  try {
    if (!p.residual(x, r)) return false;
  } catch (const NumericalError&) {
    return false;
  }
  return r.allFinite();
}

}  // namespace

LmResult levenberg_marquardt(const LmProblem& problem, const VectorXd& x0, const LmOptions& opt) {
  const auto n = x0.size();
  if (problem.lower.size() != 0 && (problem.lower.size() != n || problem.upper.size() != n)) {
    throw InputError("LM: bounds must match the parameter count");
  }
  LmResult res;
  res.x = clip(x0, problem);
  if (!evaluate(problem, res.x, res.residual)) throw NumericalError("LM: model cannot be evaluated at the start point");
  res.evaluations = 1;
  res.cost = res.residual.squaredNorm();
  res.initial_cost = res.cost;
  res.trace.push_back({0, res.x, res.cost, opt.lambda0});

  double lambda = opt.lambda0;
  MatrixXd jac;
  bool need_jacobian = true;
  int rejections = 0;
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    res.iterations = iter;
    if (res.cost <= opt.cost_floor) {
      res.converged = true;
      res.reason = "cost reached the floor";
      return res;
    }
    if (need_jacobian) {
      bool ok = false;
      try {
        ok = problem.jacobian(res.x, res.residual, jac);
      } catch (const NumericalError&) {
        ok = false;
      }
      if (!ok || !jac.allFinite() || jac.rows() != res.residual.size() || jac.cols() != n) {
        res.reason = "Jacobian evaluation failed";
        return res;
      }
      need_jacobian = false;
    }

    VectorXd scale = jac.colwise().norm().transpose();
    for (auto& s : scale) {
      if (!(s > 0.0)) s = 1.0;
    }
    if ((jac.transpose() * res.residual).lpNorm<Eigen::Infinity>() < opt.gtol) {
      res.converged = true;
      res.reason = "gradient below tolerance";
      return res;
    }

    // Scaled variables y = D x: J D^-1 has unit columns, damping is lambda I.
    const auto m = jac.rows();
    MatrixXd aug = MatrixXd::Zero(m + n, n);
    aug.topRows(m) = jac * scale.cwiseInverse().asDiagonal();
    aug.bottomRows(n).diagonal().setConstant(std::sqrt(lambda));
    VectorXd rhs = VectorXd::Zero(m + n);
    rhs.head(m) = -res.residual;
    const VectorXd dy = aug.colPivHouseholderQr().solve(rhs);
    const VectorXd dx = dy.cwiseQuotient(scale);

    const VectorXd x_new = clip(res.x + dx, problem);
    const double step = (x_new - res.x).norm();
    if (step <= opt.xtol * (res.x.norm() + opt.xtol)) {
      res.converged = true;
      res.reason = "step below tolerance";
      return res;
    }
    VectorXd r_new;
    const bool ok = evaluate(problem, x_new, r_new);
    ++res.evaluations;
    const double cost_new = ok ? r_new.squaredNorm() : 0.0;
    if (!ok || !(cost_new < res.cost)) {
      lambda *= opt.lambda_factor;
      ++rejections;
      if (rejections >= opt.max_consecutive_rejections) {
        res.reason = std::to_string(rejections) + " consecutive rejected steps";
        return res;
      }
      if (lambda > opt.lambda_max) {
        res.converged = true;
        res.reason = "no decrease possible at maximum damping";
        return res;
      }
      continue;
    }
    rejections = 0;
    const double rel_change = (res.cost - cost_new) / res.cost;
    res.x = x_new;
    res.residual = std::move(r_new);
    res.cost = cost_new;
    lambda = std::max(lambda / opt.lambda_factor, 1e-300);
    res.trace.push_back({iter, res.x, res.cost, lambda});
    need_jacobian = true;
    if (rel_change < opt.ftol) {
      res.converged = true;
      res.reason = "relative cost change below tolerance";
      return res;
    }
  }
  res.reason = "iteration limit reached";
  return res;
}

}  // namespace egs::optim
