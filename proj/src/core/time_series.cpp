#include "egs/core/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "egs/core/error.hpp"

namespace egs::core {

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::PowerMW: return "power_MW";
    case Quantity::PressureMPa: return "pressure_MPa";
    case Quantity::MassFlowKgS: return "mass_flow_kg_s";
    case Quantity::TemperatureK: return "temperature_K";
  }
  return "unknown";
}

TimeSeries::TimeSeries(std::vector<double> times, std::vector<double> values, Quantity quantity)
    : times_(std::move(times)), values_(std::move(values)), quantity_(quantity) {
  if (times_.size() != values_.size()) {
    throw InputError("time series: " + std::to_string(times_.size()) + " times but " +
                     std::to_string(values_.size()) + " values");
  }
  if (times_.empty()) throw InputError("time series: no samples");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !std::isfinite(values_[i])) {
      throw InputError("time series: non-finite entry at sample " + std::to_string(i));
    }
    if (times_[i] < 0.0) throw InputError("time series: negative time at sample " + std::to_string(i));
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw InputError("time series: times not strictly increasing at sample " + std::to_string(i));
    }
  }
}

double interpolate_at(const TimeSeries& series, double t) {
  const auto ts = series.times();
  const auto vs = series.values();
  if (!(t >= ts.front() && t <= ts.back())) {
    throw InputError("resample: query time " + std::to_string(t) + " outside [" +
                     std::to_string(ts.front()) + ", " + std::to_string(ts.back()) + "]");
  }
  const auto it = std::lower_bound(ts.begin(), ts.end(), t);
  const auto i = static_cast<std::size_t>(it - ts.begin());
  if (ts[i] == t) return vs[i];
  const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
  return vs[i - 1] + w * (vs[i] - vs[i - 1]);
}

std::vector<double> resample_linear(const TimeSeries& series, std::span<const double> query_times) {
  std::vector<double> out;
  out.reserve(query_times.size());
  for (double t : query_times) out.push_back(interpolate_at(series, t));
  return out;
}

std::vector<double> linspace_step(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) {
    throw InputError("time grid: need step > 0 and stop >= start");
  }
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::min(start + static_cast<double>(i) * step, stop);
  return out;
}

}  // namespace egs::core
