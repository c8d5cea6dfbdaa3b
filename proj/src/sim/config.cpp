#include "egs/sim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "egs/core/csv.hpp"
#include "egs/core/error.hpp"

namespace egs::sim {
namespace {

using core::format_double;
using core::parse_double;

struct ScalarKey {
  const char* name;
  double ReservoirConfig::*member;
};

struct VecKey {
  const char* name;
  Vec3 ReservoirConfig::*member;
};

struct IntKey {
  const char* name;
  int ReservoirConfig::*member;
};

constexpr ScalarKey kScalars[] = {
    {"k_matrix", &ReservoirConfig::k_matrix},
    {"k_fz", &ReservoirConfig::k_fz},
    {"porosity_matrix", &ReservoirConfig::porosity_matrix},
    {"porosity_fz", &ReservoirConfig::porosity_fz},
    {"rock_density", &ReservoirConfig::rock_density},
    {"rock_heat_capacity", &ReservoirConfig::rock_heat_capacity},
    {"thermal_conductivity", &ReservoirConfig::thermal_conductivity},
    {"fluid_density", &ReservoirConfig::fluid_density},
    {"fluid_heat_capacity", &ReservoirConfig::fluid_heat_capacity},
    {"fluid_viscosity", &ReservoirConfig::fluid_viscosity},
    {"fluid_compressibility", &ReservoirConfig::fluid_compressibility},
    {"pore_compressibility", &ReservoirConfig::pore_compressibility},
    {"gravity", &ReservoirConfig::gravity},
    {"injection_temperature", &ReservoirConfig::injection_temperature},
    {"initial_pressure", &ReservoirConfig::initial_pressure},
    {"initial_temperature", &ReservoirConfig::initial_temperature},
    {"well_factor", &ReservoirConfig::well_factor},
    {"p_bhp", &ReservoirConfig::p_bhp},
    {"well_reference_permeability", &ReservoirConfig::well_reference_permeability},
    {"wellhead_temperature_offset", &ReservoirConfig::wellhead_temperature_offset},
    {"dt_days", &ReservoirConfig::dt_days},
};

constexpr VecKey kVectors[] = {
    {"domain_size", &ReservoirConfig::domain_size},
    {"fz_min", &ReservoirConfig::fz_min},
    {"fz_max", &ReservoirConfig::fz_max},
    {"injector", &ReservoirConfig::injector},
    {"producer", &ReservoirConfig::producer},
};

constexpr IntKey kInts[] = {
    {"max_halvings", &ReservoirConfig::max_halvings},
    {"max_newton_iterations", &ReservoirConfig::max_newton_iterations},
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view v) {
  std::string text(v);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

Vec3 parse_vec(std::string_view v, const std::string& key) {
  const auto parts = split_list(v);
  if (parts.size() != 3) throw InputError(key + ": expected 3 numbers");
  Vec3 out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = parse_double(parts[i], key);
  return out;
}

int parse_int(std::string_view v, const std::string& key) {
  const double d = parse_double(v, key);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw InputError(key + ": expected an integer");
  return static_cast<int>(d);
}

bool parse_bool(std::string_view v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError(key + ": expected true or false");
}

std::string vec_text(const Vec3& v) {
  return format_double(v[0]) + ", " + format_double(v[1]) + ", " + format_double(v[2]);
}

bool inside(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] > lo[a] && p[a] < hi[a])) return false;
  }
  return true;
}

}  // namespace

double InjectionSchedule::rate_at(double t_days) const {
  if (!series) return constant_rate;
  const auto& s = *series;
  if (t_days <= s.front_time()) return s.values().front();
  if (t_days >= s.back_time()) return s.values().back();
  return core::interpolate_at(s, t_days);
}

void ReservoirConfig::validate() const {
  for (const auto& k : kScalars) {
    if (!std::isfinite(this->*k.member)) throw InputError(std::string(k.name) + " must be finite");
  }
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw InputError(std::string(name) + " must be > 0");
  };
  for (int a = 0; a < 3; ++a) {
    positive(domain_size[a], "domain_size");
    if (cells[a] < 1) throw InputError("grid needs at least one cell per axis");
  }
  positive(k_matrix, "k_matrix");
  positive(k_fz, "k_fz");
  positive(porosity_matrix, "porosity_matrix");
  positive(porosity_fz, "porosity_fz");
  if (porosity_matrix >= 1.0 || porosity_fz >= 1.0) throw InputError("porosity must be < 1");
  positive(rock_density, "rock_density");
  positive(rock_heat_capacity, "rock_heat_capacity");
  positive(thermal_conductivity, "thermal_conductivity");
  positive(fluid_density, "fluid_density");
  positive(fluid_heat_capacity, "fluid_heat_capacity");
  positive(fluid_viscosity, "fluid_viscosity");
  positive(fluid_compressibility, "fluid_compressibility");
  if (pore_compressibility < 0.0) throw InputError("pore_compressibility must be >= 0");
  if (gravity < 0.0) throw InputError("gravity must be >= 0");
  positive(injection_temperature, "injection_temperature");
  positive(initial_pressure, "initial_pressure");
  positive(initial_temperature, "initial_temperature");
  if (well_factor < 0.0) throw InputError("well_factor must be >= 0");
  positive(p_bhp, "p_bhp");
  positive(well_reference_permeability, "well_reference_permeability");
  positive(dt_days, "dt_days");
  if (max_halvings < 0) throw InputError("max_halvings must be >= 0");
  if (max_newton_iterations < 1) throw InputError("max_newton_iterations must be >= 1");
  if (injection.constant_rate < 0.0) throw InputError("q_inj must be >= 0");
  if (injection.series) {
    for (double v : injection.series->values()) {
      if (v < 0.0) throw InputError("injection schedule rates must be >= 0");
    }
  }
  for (int a = 0; a < 3; ++a) {
    if (!(fz_min[a] > 0.0 && fz_max[a] < domain_size[a] && fz_min[a] < fz_max[a])) {
      throw InputError("fracture-zone box must lie strictly inside the domain");
    }
  }
  if (!inside(injector, fz_min, fz_max)) throw InputError("injector must lie inside the fracture zone");
  if (!inside(producer, fz_min, fz_max)) throw InputError("producer must lie inside the fracture zone");
}

core::ParameterSet ReservoirConfig::parameters() const {
  return {k_fz, well_factor, p_bhp, injection.constant_rate};
}

void ReservoirConfig::apply(const core::ParameterSet& ps) {
  k_fz = ps.k_fz;
  well_factor = ps.well_factor;
  p_bhp = ps.p_bhp;
  injection.constant_rate = ps.q_inj;
}

ReservoirConfig parse_config(std::string_view text, const std::string& source,
                             const std::filesystem::path& base_dir) {
  ReservoirConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError(where + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw InputError(where + "expected 'key = value'");
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw InputError(where + "duplicate key '" + key + "'");
    seen.push_back(key);
    try {
      bool done = false;
      for (const auto& k : kScalars) {
        if (key == k.name) {
          cfg.*k.member = parse_double(value, key);
          done = true;
        }
      }
      for (const auto& k : kVectors) {
        if (key == k.name) {
          cfg.*k.member = parse_vec(value, key);
          done = true;
        }
      }
      for (const auto& k : kInts) {
        if (key == k.name) {
          cfg.*k.member = parse_int(value, key);
          done = true;
        }
      }
      if (key == "grid") {
        const auto parts = split_list(value);
        if (parts.size() != 3) throw InputError("grid: expected 3 integers");
        for (std::size_t i = 0; i < 3; ++i) cfg.cells[i] = parse_int(parts[i], key);
        done = true;
      } else if (key == "q_inj") {
        cfg.injection.constant_rate = parse_double(value, key);
        done = true;
      } else if (key == "injection_schedule") {
        std::filesystem::path p{std::string(value)};
        if (p.is_relative()) p = base_dir / p;
        cfg.injection.series = core::read_time_series_csv(p, core::Quantity::MassFlowKgS);
        done = true;
      } else if (key == "enthalpy_flow_work") {
        cfg.enthalpy_flow_work = parse_bool(value, key);
        done = true;
      } else if (key == "initial_power") {
        if (value == "step") {
          cfg.initial_power = ReservoirConfig::InitialPower::FirstStep;
        } else if (value == "state") {
          cfg.initial_power = ReservoirConfig::InitialPower::InitialState;
        } else {
          throw InputError("initial_power: expected 'step' or 'state'");
        }
        done = true;
      }
      if (!done) throw InputError("unknown key '" + key + "'");
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
  return cfg;
}

ReservoirConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), path.parent_path());
}

std::string format_config(const ReservoirConfig& cfg, const std::string& schedule_path) {
  std::ostringstream out;
  out << "grid = " << cfg.cells[0] << ", " << cfg.cells[1] << ", " << cfg.cells[2] << '\n';
  for (const auto& k : kVectors) out << k.name << " = " << vec_text(cfg.*k.member) << '\n';
  for (const auto& k : kScalars) out << k.name << " = " << format_double(cfg.*k.member) << '\n';
  for (const auto& k : kInts) out << k.name << " = " << cfg.*k.member << '\n';
  out << "enthalpy_flow_work = " << (cfg.enthalpy_flow_work ? "true" : "false") << '\n';
  out << "initial_power = "
      << (cfg.initial_power == ReservoirConfig::InitialPower::FirstStep ? "step" : "state") << '\n';
  out << "q_inj = " << format_double(cfg.injection.constant_rate) << '\n';
  if (cfg.injection.series && !schedule_path.empty()) out << "injection_schedule = " << schedule_path << '\n';
  return out.str();
}

}  // namespace egs::sim
