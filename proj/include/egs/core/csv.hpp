#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "egs/core/time_series.hpp"

namespace egs::core {

inline constexpr std::string_view kTimeSeriesHeader = "time_days,value";

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// Strict decimal parse of the whole field; throws InputError on junk.
double parse_double(std::string_view text, std::string_view what);

/// Reads the `time_days,value` CSV format. Errors carry path and line number.
TimeSeries read_time_series_csv(const std::filesystem::path& path, Quantity quantity = Quantity::PowerMW);

void write_time_series_csv(std::ostream& out, const TimeSeries& series);
void write_time_series_csv(const std::filesystem::path& path, const TimeSeries& series);

}  // namespace egs::core
