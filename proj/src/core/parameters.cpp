#include "egs/core/parameters.hpp"

#include <cmath>
#include <string>

#include "egs/core/error.hpp"

namespace egs::core {

void ParameterSet::validate(double initial_pressure) const {
  if (!(k_fz > 1e-20 && k_fz < 1e-10)) {
    throw InputError("k_fz = " + std::to_string(k_fz) + " m^2 outside (1e-20, 1e-10)");
  }
  if (!(well_factor > 0.0) || !std::isfinite(well_factor)) throw InputError("well_factor must be > 0");
  if (!(p_bhp > 0.0)) throw InputError("p_bhp must be > 0");
  if (!(p_bhp < initial_pressure)) {
    throw InputError("p_bhp must be below the initial reservoir pressure");
  }
  if (!(q_inj >= 0.0) || !std::isfinite(q_inj)) throw InputError("q_inj must be >= 0");
}

std::string_view to_string(Parameter p) {
  switch (p) {
    case Parameter::KFz: return "k_fz";
    case Parameter::WellFactor: return "well_factor";
    case Parameter::PBhp: return "p_bhp";
    case Parameter::QInj: return "q_inj";
  }
  return "?";
}

Parameter parameter_from_string(std::string_view name) {
  for (auto p : kAllParameters) {
    if (to_string(p) == name) return p;
  }
  throw UsageError("unknown parameter '" + std::string(name) + "'");
}

double get(const ParameterSet& ps, Parameter p) {
  switch (p) {
    case Parameter::KFz: return ps.k_fz;
    case Parameter::WellFactor: return ps.well_factor;
    case Parameter::PBhp: return ps.p_bhp;
    case Parameter::QInj: return ps.q_inj;
  }
  return 0.0;
}

void set(ParameterSet& ps, Parameter p, double value) {
  switch (p) {
    case Parameter::KFz: ps.k_fz = value; break;
    case Parameter::WellFactor: ps.well_factor = value; break;
    case Parameter::PBhp: ps.p_bhp = value; break;
    case Parameter::QInj: ps.q_inj = value; break;
  }
}

}  // namespace egs::core
