#include "egs/core/metrics.hpp"

#include <cmath>
#include <string>

#include "egs/core/error.hpp"

namespace egs::core {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, std::size_t min_len) {
  if (a.size() != b.size()) {
    throw InputError("metrics: length mismatch (" + std::to_string(a.size()) + " observed vs " +
                     std::to_string(b.size()) + " predicted)");
  }
  if (a.size() < min_len) {
    throw InputError("metrics: need at least " + std::to_string(min_len) + " samples");
  }
}

double sum_sq_residual(std::span<const double> observed, std::span<const double> predicted) {
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double r = observed[i] - predicted[i];
    s += r * r;
  }
  return s;
}

}  // namespace

double r_squared(std::span<const double> observed, std::span<const double> predicted) {
  require_same_length(observed, predicted, 2);
  double mean = 0.0;
  for (double v : observed) mean += v;
  mean /= static_cast<double>(observed.size());
  double ss_tot = 0.0;
  for (double v : observed) ss_tot += (v - mean) * (v - mean);
  if (!(ss_tot > 0.0)) throw UndefinedR2Error("R^2 undefined: observed values have zero variance");
  return 1.0 - sum_sq_residual(observed, predicted) / ss_tot;
}

double mse(std::span<const double> observed, std::span<const double> predicted) {
  require_same_length(observed, predicted, 1);
  return sum_sq_residual(observed, predicted) / static_cast<double>(observed.size());
}

double rmse(std::span<const double> observed, std::span<const double> predicted) {
  return std::sqrt(mse(observed, predicted));
}

FitMetrics compute_metrics(std::span<const double> observed, std::span<const double> predicted) {
  FitMetrics m;
  m.mse = mse(observed, predicted);
  m.rmse = std::sqrt(m.mse);
  m.r2 = r_squared(observed, predicted);
  m.n = observed.size();
  return m;
}

}  // namespace egs::core
