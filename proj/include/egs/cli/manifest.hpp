#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace egs::cli {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
/// Throws InputError if the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;  // as given for inputs, relative to the output directory for outputs
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Record of one CLI invocation. Holds no timestamps or host data, so
/// rerunning identical inputs yields an identical manifest.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string output_dir;
  std::string tool_version;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;

  void add_input(const std::filesystem::path& path);
  /// SHA-256 over the command, arguments and input digests.
  std::string input_hash() const;
  nlohmann::ordered_json to_json() const;
};

}  // namespace egs::cli
