#include "egs/rom/rom.hpp"

#include <quadmath.h>

#include <cmath>
#include <memory>
#include <string>

namespace egs::rom {
namespace {

using quad = __float128;

// The published polynomials cancel terms of ~1e9 to produce O(1) MW values, so
// every sum is carried in binary128 and rounded once at the end.
template <typename T>
quad horner(const std::vector<T>& c, quad t) {
  quad acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + static_cast<quad>(*it);
  return acc;
}

struct QuadFunction {
  std::vector<quad> poly;
  quad exp_coeff = 0;
  quad sin_coeff = 0;
};

quad bump_value(const HeavisideBump& b, quad t) {
  // 1 + tanh(a) == 2 / (1 + exp(-2a)), without cancellation for a << 0.
  const quad a = static_cast<quad>(b.n) * (t - static_cast<quad>(b.t_center));
  const quad step = 2 / (1 + expq(-2 * a));
  return static_cast<quad>(b.m) * powq(step, static_cast<quad>(b.r));
}

quad abscissa(double t_days, double k_fz) {
  return fabsq(log10q(static_cast<quad>(k_fz))) + 1e-6Q * static_cast<quad>(t_days);
}

QuadFunction qf(std::initializer_list<quad> c, quad e = 0, quad sn = 0) { return {std::vector<quad>(c), e, sn}; }

}  // namespace

// Decimal-exact copies of the published tables. Holding them only as doubles
// perturbs each term by up to 2^-53 of itself, which near sign changes of P
// is larger than 1e-12 |P|.
namespace detail {
struct ExactCoefficients {
  std::array<QuadFunction, 4> functions;
  std::array<AugmentedTimeFunction, 4> image;  // the double rounding they shadow
};
}  // namespace detail

std::string_view to_string(RomKind kind) {
  switch (kind) {
    case RomKind::Rom1: return "rom1";
    case RomKind::Rom2: return "rom2";
    case RomKind::Rom3: return "rom3";
  }
  return "?";
}

RomKind rom_kind_from_int(int n) {
  if (n < 1 || n > 3) throw UsageError("ROM index must be 1, 2 or 3 (got " + std::to_string(n) + ")");
  return static_cast<RomKind>(n);
}

std::string_view to_string(CoefficientPolicy policy) {
  return policy == CoefficientPolicy::Corrected ? "corrected" : "as-printed";
}

CoefficientPolicy policy_from_string(std::string_view s) {
  if (s == "corrected") return CoefficientPolicy::Corrected;
  if (s == "as-printed") return CoefficientPolicy::AsPrinted;
  throw UsageError("--coefficients must be 'corrected' or 'as-printed'");
}

int max_degree(RomKind kind) {
  switch (kind) {
    case RomKind::Rom1: return 4;
    case RomKind::Rom2: return 8;
    case RomKind::Rom3: return 10;
  }
  return 0;
}

double HeavisideBump::eval(double t) const { return static_cast<double>(bump_value(*this, t)); }

void RomSpec::validate() const {
  const int dmax = max_degree(kind);
  for (std::size_t i = 0; i < coeff_functions.size(); ++i) {
    const auto& f = coeff_functions[i];
    const auto tag = std::string(to_string(kind)) + " coefficient function " + std::to_string(i);
    if (f.polynomial.coeffs.empty()) throw InputError(tag + ": empty polynomial");
    if (f.polynomial.degree() > dmax) {
      throw InputError(tag + ": degree " + std::to_string(f.polynomial.degree()) + " exceeds " +
                       std::to_string(dmax));
    }
    for (double c : f.polynomial.coeffs) {
      if (!std::isfinite(c)) throw InputError(tag + ": non-finite coefficient");
    }
    if (!std::isfinite(f.exp_base_coeff) || !std::isfinite(f.sin_coeff)) {
      throw InputError(tag + ": non-finite exp/sin coefficient");
    }
    if (kind != RomKind::Rom2 && (f.exp_base_coeff != 0.0 || f.sin_coeff != 0.0)) {
      throw InputError(tag + ": exp/sin terms are only part of the rom2 form");
    }
  }
  if (kind != RomKind::Rom2 && !bumps.empty()) {
    throw InputError(std::string(to_string(kind)) + ": smooth-step terms are only part of the rom2 form");
  }
  for (std::size_t j = 0; j < bumps.size(); ++j) {
    const auto& b = bumps[j];
    if (!(b.n > 0.0) || !std::isfinite(b.m) || !std::isfinite(b.n) || !std::isfinite(b.t_center) ||
        !std::isfinite(b.r)) {
      throw InputError("bump " + std::to_string(j + 1) + ": need finite parameters and n > 0");
    }
  }
}

RomSpec builtin_rom(RomKind kind, CoefficientPolicy policy) {
  const bool printed = policy == CoefficientPolicy::AsPrinted;
  RomSpec s;
  s.kind = kind;
  std::array<QuadFunction, 4> q{};
  switch (kind) {
    case RomKind::Rom1:
      q[0] = qf({-2.689e3Q, -9.951e2Q, 28.37Q, -3.013e-1Q, 1.095e-3Q});
      q[1] = qf({5.517e2Q, 2.01e2Q, -5.751Q, -6.111e-2Q, -2.222e-4Q});
      q[2] = qf({-3.718e1Q, -1.347e1Q, 3.867e-1Q, -4.112e-3Q, 1.495e-5Q});
      // Printed constant 8.241e3 puts the x^3 term alone near 2.8e7 MW at t = 0.
      q[3] = qf({printed ? 8.241e3Q : 8.241e-1Q, 2.998e-1Q, -8.634e-3Q, 9.184e-5Q, -3.339e-7Q});
      break;
    case RomKind::Rom2: {
      q[0] = qf({2.318e3Q, -2.466e3Q, 1.338e2Q, -3.413Q, 4.612e-2Q, -3.393e-4Q, 1.376e-6Q,
                                    -3.538e-9Q, 6.869e-12Q}, -2.307e3Q, 1.342Q);
      // FIXME: b_1 repeats b_0's exponential constant exactly; kept as printed
      // until a source with the intended value turns up.
      q[1] = qf({-4.623e2Q, 4.992e2Q, -2.713e1Q, 6.918e-1Q, -9.339e-3Q, 6.856e-5Q,
                                    -2.766e-7Q, 7.056e-10Q, -1.369e-12Q}, -2.307e3Q, -2.676Q);
      // Printed table lists 6.28e-4 against t^6 between the t^3 and t^5 terms
      // and t^6 again later; the corrected table reads it as the t^4 term.
      if (printed) {
        q[2] = qf({3.103e1Q, -3.353e1Q, 1.825Q, -4.652e-2Q, 0.0Q, -4.608e-6Q,
                                      6.28e-4Q + 1.858e-8Q, -4.734e-11Q, 9.191e-14Q}, -3.087e1Q, 1.796e-2Q);
      } else {
        q[2] = qf({3.103e1Q, -3.353e1Q, 1.825Q, -4.652e-2Q, 6.28e-4Q, -4.608e-6Q, 1.858e-8Q,
                                      -4.734e-11Q, 9.191e-14Q}, -3.087e1Q, 1.796e-2Q);
      }
      q[3] = qf({-6.997e-1Q, 7.477e-1Q, -4.073e-2Q, 1.038e-3Q, -1.402e-5Q, 1.031e-7Q,
                                    -4.168e-10Q, -1.068e-12Q, -2.073e-15Q}, 6.964e-1Q, -4.048e-4Q);

      constexpr std::array<double, 29> centers = {10,  15,  17.5, 19,   20,  21,  22.5, 25,  30, 32.5,
                                                  35,  37.5, 50,  52.5, 55,  60,  62.5, 65,  70, 75,
                                                  80,  85,  87.5, 90,  95,  100, 105,  110, 112.5};
      constexpr std::array<double, 29> amplitudes = {
          0.1,   0.085, 0.05,  -0.0125, 0.125,  0.1,   -0.0125, 0.085,  -0.075, -0.085,
          0.085, 0.125, -0.085, -0.01,  -0.05,  -0.075, -0.075, -0.025, -0.015, -0.15,
          -0.05, -0.05, -0.05, -0.15,   -0.1,   -0.085, -0.175, -0.05,  0.05};
      constexpr std::array<double, 29> exponents = {1,    1,    1,    0.5,  0.25, 0.5,  0.1,  0.25,
                                                    0.75, 0.02, 0.01, 0.01, 0.25, 1.5,  1.75, 0.01,
                                                    0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.025,
                                                    0.075, 0.01, 0.15, 0.01, 0.01};
      for (std::size_t j = 0; j < centers.size(); ++j) {
        s.bumps.push_back({amplitudes[j], j < 3 ? 100.0 : 1000.0, centers[j], exponents[j]});
      }
      break;
    }
    case RomKind::Rom3:
      q[0] = qf({7.913e2Q, -1.747e3Q, 2.089e1Q, 5.173Q, -3.234e-1Q, 9.397e-3Q,
                                              -1.613e-4Q, 1.727e-6Q, -1.134e-8Q, 4.183e-11Q, -6.627e-14Q});
      q[1] = qf({-1.578e2Q, 3.557e2Q, -4.613Q, -1.093Q, 6.432e-2Q, -1.872e-3Q,
                                              3.215e-5Q, -3.442e-7Q, 2.261e-9Q, -8.337e-12Q, 1.321e-14Q});
      q[2] = qf({1.059e1Q, -2.391e1Q, -3.136e-1Q, 6.835e-2Q, -4.316e-3Q, 1.256e-4Q,
                                              -2.158e-6Q, 2.311e-8Q, -1.517e-10Q, 5.597e-13Q, -8.868e-16Q});
      q[3] = qf({-2.388e-1Q, 5.305e-1Q, -6.637e-3Q, -1.553e-3Q, 9.754e-5Q,
                                              -2.837e-6Q, 4.871e-8Q, -5.215e-10Q, 3.425e-12Q, -1.263e-14Q,
                                              2.001e-17Q});
      break;
  }
  auto exact = std::make_shared<detail::ExactCoefficients>();
  for (std::size_t i = 0; i < 4; ++i) {
    auto& f = s.coeff_functions[i];
    for (quad c : q[i].poly) f.polynomial.coeffs.push_back(static_cast<double>(c));
    f.exp_base_coeff = static_cast<double>(q[i].exp_coeff);
    f.sin_coeff = static_cast<double>(q[i].sin_coeff);
    exact->functions[i] = q[i];
    exact->image[i] = f;
  }
  s.exact = std::move(exact);
  return s;
}

double rom_abscissa(double t_days, double k_fz) {
  if (!(k_fz > 0.0)) throw InputError("k_fz must be > 0");
  return static_cast<double>(abscissa(t_days, k_fz));
}

double eval_rom(const RomSpec& spec, double t_days, double k_fz) {
  if (!(t_days >= 0.0) || !std::isfinite(t_days)) throw InputError("ROM time must be finite and >= 0");
  if (!(k_fz > 0.0) || !std::isfinite(k_fz)) throw InputError("k_fz must be finite and > 0");

  const quad t = t_days;
  const quad x = abscissa(t_days, k_fz);
  const quad exp_term = powq(0.1Q, t);
  const quad sin_term = sinq(t);

  const bool use_exact = spec.exact && spec.exact->image == spec.coeff_functions;
  quad total = 0;
  quad x_pow = 1;
  for (int i = 0; i < 4; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto& f = spec.coeff_functions[idx];
    quad c;
    if (use_exact) {
      const auto& e = spec.exact->functions[idx];
      c = horner(e.poly, t) + e.exp_coeff * exp_term + e.sin_coeff * sin_term;
    } else {
      c = horner(f.polynomial.coeffs, t);
      if (f.exp_base_coeff != 0.0) c += static_cast<quad>(f.exp_base_coeff) * exp_term;
      if (f.sin_coeff != 0.0) c += static_cast<quad>(f.sin_coeff) * sin_term;
    }
    const quad term = c * x_pow;
    if (!std::isfinite(static_cast<double>(term))) {
      throw RomEvaluationError("ROM coefficient term " + std::to_string(i) +
                                   " is not finite at t = " + std::to_string(t_days),
                               i);
    }
    total += term;
    x_pow *= x;
  }
  for (std::size_t j = 0; j < spec.bumps.size(); ++j) {
    const quad term = bump_value(spec.bumps[j], t);
    if (!std::isfinite(static_cast<double>(term))) {
      throw RomEvaluationError("ROM bump " + std::to_string(j + 1) + " is not finite at t = " +
                                   std::to_string(t_days),
                               static_cast<int>(4 + j));
    }
    total += term;
  }
  const double out = static_cast<double>(total);
  if (!std::isfinite(out)) throw RomEvaluationError("ROM sum overflows at t = " + std::to_string(t_days), -1);
  return out;
}

core::TimeSeries eval_rom_curve(const RomSpec& spec, std::span<const double> times, double k_fz) {
  if (times.empty()) throw InputError("eval_rom_curve: empty time grid");
  std::vector<double> values;
  values.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    try {
      values.push_back(eval_rom(spec, times[i], k_fz));
    } catch (const RomEvaluationError& e) {
      throw RomEvaluationError(std::string(e.what()) + " (time index " + std::to_string(i) + ")",
                               e.term_index());
    } catch (const InputError& e) {
      throw InputError(std::string(e.what()) + " (time index " + std::to_string(i) + ")");
    }
  }
  return core::TimeSeries(std::vector<double>(times.begin(), times.end()), std::move(values),
                          core::Quantity::PowerMW);
}

RomBasis rom_basis(double t_days, double k_fz, int degree) {
  RomBasis b;
  const double x = rom_abscissa(t_days, k_fz);
  b.x_powers = {1.0, x, x * x, x * x * x};
  b.t_powers.resize(static_cast<std::size_t>(degree) + 1);
  double tp = 1.0;
  for (auto& v : b.t_powers) {
    v = tp;
    tp *= t_days;
  }
  b.exp_term = std::pow(0.1, t_days);
  b.sin_term = std::sin(t_days);
  return b;
}

}  // namespace egs::rom
