#pragma once

#include <filesystem>

#include <json.hpp>

#include "egs/rom/rom.hpp"

namespace egs::rom {

/// JSON document layout:
///   { "kind": "rom1"|"rom2"|"rom3",
///     "coefficients": [[c_00, c_01, ...], ... 4 arrays],
///     "exp_coefficients": [4 numbers], "sin_coefficients": [4 numbers],
///     "bumps": [{"m":..,"n":..,"t_center":..,"r":..}, ...] }
nlohmann::ordered_json to_json(const RomSpec& spec);

/// Parses and validates. Throws InputError on schema violations.
RomSpec rom_from_json(const nlohmann::ordered_json& doc);

RomSpec load_rom(const std::filesystem::path& path);
void save_rom(const std::filesystem::path& path, const RomSpec& spec);

}  // namespace egs::rom
