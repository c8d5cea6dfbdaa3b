#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace egs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitNumerical = 4;

/// Parses `start:end:step` (days) into an inclusive grid. Throws UsageError.
std::vector<double> parse_time_range(std::string_view text);

/// Runs one command line (args[0] is the program name) and returns the
/// process exit code. Diagnostics go to `err`, summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace egs::cli
