#include "egs/cli/manifest.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "egs/core/error.hpp"

namespace egs::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.push_back({path.string(), sha256_file(path), std::filesystem::file_size(path)});
}

std::string RunManifest::input_hash() const {
  std::string text = command + '\n';
  for (const auto& a : arguments) text += a + '\n';
  for (const auto& f : inputs) text += f.path + ' ' + f.sha256 + '\n';
  return sha256_hex(text);
}

nlohmann::ordered_json RunManifest::to_json() const {
  auto files = [](const std::vector<FileDigest>& list) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : list) arr.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return arr;
  };
  nlohmann::ordered_json doc;
  doc["command"] = command;
  doc["arguments"] = arguments;
  doc["output_dir"] = output_dir;
  doc["tool_version"] = tool_version;
  doc["input_hash"] = input_hash();
  doc["inputs"] = files(inputs);
  doc["outputs"] = files(outputs);
  return doc;
}

}  // namespace egs::cli
