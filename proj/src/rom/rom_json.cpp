#include "egs/rom/rom_json.hpp"

#include <fstream>

namespace egs::rom {

using nlohmann::ordered_json;

ordered_json to_json(const RomSpec& spec) {
  ordered_json doc;
  doc["kind"] = std::string(to_string(spec.kind));
  auto coeffs = ordered_json::array();
  auto exps = ordered_json::array();
  auto sins = ordered_json::array();
  for (const auto& f : spec.coeff_functions) {
    coeffs.push_back(f.polynomial.coeffs);
    exps.push_back(f.exp_base_coeff);
    sins.push_back(f.sin_coeff);
  }
  doc["coefficients"] = std::move(coeffs);
  doc["exp_coefficients"] = std::move(exps);
  doc["sin_coefficients"] = std::move(sins);
  auto bumps = ordered_json::array();
  for (const auto& b : spec.bumps) {
    bumps.push_back({{"m", b.m}, {"n", b.n}, {"t_center", b.t_center}, {"r", b.r}});
  }
  doc["bumps"] = std::move(bumps);
  return doc;
}

RomSpec rom_from_json(const ordered_json& doc) {
  RomSpec spec;
  try {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "rom1") {
      spec.kind = RomKind::Rom1;
    } else if (kind == "rom2") {
      spec.kind = RomKind::Rom2;
    } else if (kind == "rom3") {
      spec.kind = RomKind::Rom3;
    } else {
      throw InputError("unknown ROM kind '" + kind + "'");
    }
    const auto& coeffs = doc.at("coefficients");
    if (!coeffs.is_array() || coeffs.size() != 4) throw InputError("'coefficients' must hold 4 arrays");
    for (std::size_t i = 0; i < 4; ++i) {
      spec.coeff_functions[i].polynomial.coeffs = coeffs[i].get<std::vector<double>>();
    }
    if (doc.contains("exp_coefficients")) {
      const auto v = doc["exp_coefficients"].get<std::vector<double>>();
      if (v.size() != 4) throw InputError("'exp_coefficients' must hold 4 numbers");
      for (std::size_t i = 0; i < 4; ++i) spec.coeff_functions[i].exp_base_coeff = v[i];
    }
    if (doc.contains("sin_coefficients")) {
      const auto v = doc["sin_coefficients"].get<std::vector<double>>();
      if (v.size() != 4) throw InputError("'sin_coefficients' must hold 4 numbers");
      for (std::size_t i = 0; i < 4; ++i) spec.coeff_functions[i].sin_coeff = v[i];
    }
    if (doc.contains("bumps")) {
      for (const auto& b : doc["bumps"]) {
        spec.bumps.push_back({b.at("m").get<double>(), b.at("n").get<double>(),
                              b.at("t_center").get<double>(), b.at("r").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("ROM JSON: ") + e.what());
  }
  spec.validate();
  return spec;
}

RomSpec load_rom(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ROM file " + path.string());
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return rom_from_json(doc);
}

void save_rom(const std::filesystem::path& path, const RomSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_json(spec).dump(2) << '\n';
}

}  // namespace egs::rom
