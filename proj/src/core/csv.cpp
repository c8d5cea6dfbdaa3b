#include "egs/core/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <vector>

#include "egs/core/error.hpp"

namespace egs::core {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return v;
}

TimeSeries read_time_series_csv(const std::filesystem::path& path, Quantity quantity) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open time series file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> times, values;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (!header_seen) {
      if (body != kTimeSeriesHeader) {
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected header '" +
                         std::string(kTimeSeriesHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = body.find(',');
    if (comma == std::string_view::npos || body.find(',', comma + 1) != std::string_view::npos) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    try {
      times.push_back(parse_double(body.substr(0, comma), "time"));
      values.push_back(parse_double(body.substr(comma + 1), "value"));
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header_seen) throw InputError(path.string() + ": empty file");
  try {
    return TimeSeries(std::move(times), std::move(values), quantity);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_time_series_csv(std::ostream& out, const TimeSeries& series) {
  out << kTimeSeriesHeader << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_double(series.times()[i]) << ',' << format_double(series.values()[i]) << '\n';
  }
}

void write_time_series_csv(const std::filesystem::path& path, const TimeSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_time_series_csv(out, series);
}

}  // namespace egs::core
