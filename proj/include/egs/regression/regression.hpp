#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "egs/core/metrics.hpp"
#include "egs/core/time_series.hpp"
#include "egs/rom/rom.hpp"

namespace egs::regression {

enum class Split { Train, Validate, Prediction };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

struct DatasetCurve {
  std::string name;
  double log10_k_fz = 0.0;
  Split split = Split::Train;
  core::TimeSeries curve;
};

/// Power curves at known fracture-zone permeabilities. `curves` hold the
/// Train/Validate entries; the optional prediction curve carries the
/// permeability it was calibrated at.
struct Dataset {
  std::vector<DatasetCurve> curves;
  std::optional<DatasetCurve> prediction;

  /// Throws InputError unless there is at least one curve, every log10 k is
  /// within [-20, -10], names are unique and split labels fit their slot.
  void validate() const;
  std::size_t count(Split s) const;
};

/// Manifest layout:
///   { "curves": [ {"name": .., "path": "a.csv", "log10_k_fz": -14.0, "split": "train"}, ... ],
///     "prediction": {"name": .., "path": .., "log10_k_fz": ..} }
/// Paths are resolved against the manifest directory.
Dataset load_dataset(const std::filesystem::path& manifest);
nlohmann::ordered_json dataset_manifest_json(const Dataset& data, const std::vector<std::string>& paths,
                                             const std::optional<std::string>& prediction_path = std::nullopt);

/// Free-parameter names of a template, in Jacobian column order:
/// "f<i>.c<p>" for polynomial coefficients, "f<i>.exp" and "f<i>.sin" on
/// Rom2, then "bump<j>.m" (1-based) for the smooth-step amplitudes.
std::vector<std::string> fit_parameter_names(const rom::RomSpec& spec);

enum class InitialGuess {
  MeanConstant,  // free coefficients 0, except f0.c0 = mean training power
  Template,      // start from the template's own values
};

struct FitOptions {
  int max_iterations = 500;
  double ftol = 1e-10;
  double gtol = 1e-8;
  std::size_t stride = 1;            // use every stride-th sample of each training curve
  std::vector<std::string> frozen;   // names from fit_parameter_names, held at template values
  InitialGuess initial_guess = InitialGuess::MeanConstant;
  /// Times at which the prediction curve joins the training residuals; empty
  /// means the prediction curve is not used for fitting.
  std::vector<double> prediction_sample_times;
};

/// Rom2's mixed-training sample times on the prediction curve.
std::vector<double> rom2_prediction_sample_times();

struct CurveScore {
  std::string name;
  Split split = Split::Train;
  double log10_k_fz = 0.0;
  core::FitMetrics metrics;  // r2 is NaN on a constant curve
  double max_abs_error = 0.0;
};

struct FitDiagnostics {
  int iterations = 0;
  int evaluations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;  // sum of squared residuals, MW^2
  std::size_t residual_count = 0;
  std::size_t free_parameter_count = 0;
  bool converged = false;
  std::string reason;
};

struct FitReport {
  rom::RomSpec spec;
  std::vector<CurveScore> scores;  // dataset order, prediction last
  FitDiagnostics diagnostics;
};

/// Per-curve metrics of `spec` on every curve of the dataset.
std::vector<CurveScore> score(const rom::RomSpec& spec, const Dataset& data);

/// Least-squares fit of the template's free coefficients to the training
/// samples with Levenberg-Marquardt. Throws InputError with no training
/// curve or more free coefficients than residuals; non-convergence is only
/// reported in the diagnostics.
FitReport fit_rom(const rom::RomSpec& template_spec, const Dataset& data, const FitOptions& options = {});

nlohmann::ordered_json to_json(const std::vector<CurveScore>& scores);
nlohmann::ordered_json to_json(const FitReport& report);
/// Fixed-width text table of the scores.
std::string format_score_table(const std::vector<CurveScore>& scores);

}  // namespace egs::regression
