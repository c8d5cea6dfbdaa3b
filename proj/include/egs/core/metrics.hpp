#pragma once

#include <cstddef>
#include <span>

namespace egs::core {

struct FitMetrics {
  double r2 = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

/// 1 - SS_res / SS_tot with SS_tot taken about the observed mean.
/// Needs equal lengths >= 2; throws UndefinedR2Error if `observed` is constant.
double r_squared(std::span<const double> observed, std::span<const double> predicted);

double mse(std::span<const double> observed, std::span<const double> predicted);
double rmse(std::span<const double> observed, std::span<const double> predicted);

/// All three metrics at once. rmse is exactly sqrt(mse).
FitMetrics compute_metrics(std::span<const double> observed, std::span<const double> predicted);

}  // namespace egs::core
