#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egs/core/error.hpp"
#include "egs/core/time_series.hpp"

namespace egs::rom {

enum class RomKind { Rom1 = 1, Rom2 = 2, Rom3 = 3 };

/// Which variant of the published tables `builtin_rom` returns.
enum class CoefficientPolicy { Corrected, AsPrinted };

std::string_view to_string(RomKind kind);
RomKind rom_kind_from_int(int n);
std::string_view to_string(CoefficientPolicy policy);
CoefficientPolicy policy_from_string(std::string_view s);

/// Maximum time-polynomial degree allowed for each ROM form.
int max_degree(RomKind kind);

/// c_0 + c_1 t + ... + c_d t^d, t in days.
struct TimePolynomial {
  std::vector<double> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool operator==(const TimePolynomial&) const = default;
};

/// Polynomial plus `exp_base_coeff * 0.1^t + sin_coeff * sin(t)`.
struct AugmentedTimeFunction {
  TimePolynomial polynomial;
  double exp_base_coeff = 0.0;
  double sin_coeff = 0.0;

  bool operator==(const AugmentedTimeFunction&) const = default;
};

/// Smooth step m * (1 + tanh(n (t - t_center)))^r.
struct HeavisideBump {
  double m = 0.0;
  double n = 1.0;  // 1/days
  double t_center = 0.0;
  double r = 1.0;

  double eval(double t) const;
  bool operator==(const HeavisideBump&) const = default;
};

namespace detail {
struct ExactCoefficients;
}

/// Power(t, k) = sum_i f_i(t) x^i + sum_j bump_j(t), x = |log10 k| + 1e-6 t.
struct RomSpec {
  RomKind kind = RomKind::Rom1;
  std::array<AugmentedTimeFunction, 4> coeff_functions{};
  std::vector<HeavisideBump> bumps;

  /// Structural checks: degree limits per kind, exp/sin terms and bumps only
  /// on Rom2, finite coefficients, n > 0. Throws InputError.
  void validate() const;

  /// Set by builtin_rom: the decimal tables in binary128. Used by eval_rom
  /// only while coeff_functions still equal their double rounding, so editing
  /// a builtin spec silently falls back to the double coefficients.
  std::shared_ptr<const detail::ExactCoefficients> exact;

  /// Compares the visible coefficients only.
  bool operator==(const RomSpec& o) const {
    return kind == o.kind && coeff_functions == o.coeff_functions && bumps == o.bumps;
  }
};

/// Thrown when a term of the ROM sum is non-finite. `term_index` is 0..3 for
/// the coefficient functions and 4 + j for bump j (0-based).
class RomEvaluationError : public NumericalError {
 public:
  RomEvaluationError(const std::string& what, int term_index)
      : NumericalError(what), term_index_(term_index) {}
  int term_index() const { return term_index_; }

 private:
  int term_index_;
};

/// The published coefficient tables.
RomSpec builtin_rom(RomKind kind, CoefficientPolicy policy = CoefficientPolicy::Corrected);

/// x = |log10 k_fz| + 1e-6 t.
double rom_abscissa(double t_days, double k_fz);

/// Evaluates the ROM in MW. Throws InputError for t < 0 or k_fz <= 0.
double eval_rom(const RomSpec& spec, double t_days, double k_fz);

/// Elementwise eval_rom; the result is labeled PowerMW.
core::TimeSeries eval_rom_curve(const RomSpec& spec, std::span<const double> times, double k_fz);

/// Values of the three additive pieces at (t, k); used by regression to build
/// design matrices consistent with eval_rom.
struct RomBasis {
  std::array<double, 4> x_powers{};  // x^0..x^3
  std::vector<double> t_powers;      // t^0..t^d for the requested degree
  double exp_term = 0.0;             // 0.1^t
  double sin_term = 0.0;             // sin t
};
RomBasis rom_basis(double t_days, double k_fz, int degree);

}  // namespace egs::rom
