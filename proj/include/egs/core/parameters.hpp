#pragma once

#include <array>
#include <string_view>

namespace egs::core {

/// The four inputs found to drive produced power.
struct ParameterSet {
  double k_fz = 7.75e-16;         // fracture-zone permeability [m^2]
  double well_factor = 3.163e-13;  // production well factor
  double p_bhp = 9.5e6;           // bottom-hole pressure [Pa]
  double q_inj = 7.5;             // injection mass rate [kg/s]

  /// Throws InputError unless 1e-20 < k_fz < 1e-10, well_factor > 0,
  /// 0 < p_bhp < initial_pressure and q_inj >= 0.
  void validate(double initial_pressure) const;

  bool operator==(const ParameterSet&) const = default;
};

enum class Parameter { KFz = 0, WellFactor = 1, PBhp = 2, QInj = 3 };

inline constexpr std::array<Parameter, 4> kAllParameters = {Parameter::KFz, Parameter::WellFactor,
                                                            Parameter::PBhp, Parameter::QInj};

std::string_view to_string(Parameter p);
Parameter parameter_from_string(std::string_view name);

double get(const ParameterSet& ps, Parameter p);
void set(ParameterSet& ps, Parameter p, double value);

}  // namespace egs::core
