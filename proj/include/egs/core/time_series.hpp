#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace egs::core {

enum class Quantity { PowerMW, PressureMPa, MassFlowKgS, TemperatureK };

std::string_view to_string(Quantity q);

/// Scalar signal sampled at strictly increasing, non-negative times (days).
///
/// Immutable after construction; the constructor enforces equal lengths,
/// at least one sample, finite entries and strict monotonicity of time.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> times, std::vector<double> values,
             Quantity quantity = Quantity::PowerMW);

  std::span<const double> times() const { return times_; }
  std::span<const double> values() const { return values_; }
  Quantity quantity() const { return quantity_; }
  std::size_t size() const { return times_.size(); }
  double front_time() const { return times_.front(); }
  double back_time() const { return times_.back(); }

  bool operator==(const TimeSeries&) const = default;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  Quantity quantity_;
};

/// Piecewise-linear interpolation at `query_times`. Throws InputError for any
/// query outside [front_time, back_time].
std::vector<double> resample_linear(const TimeSeries& series, std::span<const double> query_times);

/// Single-point convenience over resample_linear.
double interpolate_at(const TimeSeries& series, double t);

/// Times `start, start+step, ...` up to and including `stop` (within 1e-9 step).
std::vector<double> linspace_step(double start, double stop, double step);

}  // namespace egs::core
