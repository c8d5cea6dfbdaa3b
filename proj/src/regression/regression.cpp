#include "egs/regression/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "egs/core/csv.hpp"
#include "egs/core/error.hpp"
#include "egs/optim/lm.hpp"
#include "egs/rom/rom_json.hpp"

namespace egs::regression {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::ordered_json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validate: return "validate";
    case Split::Prediction: return "prediction";
  }
  return "?";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validate") return Split::Validate;
  if (s == "prediction") return Split::Prediction;
  throw InputError("unknown split label '" + std::string(s) + "' (expected train, validate or prediction)");
}

void Dataset::validate() const {
  if (curves.empty() && !prediction) throw InputError("dataset: no curves");
  std::set<std::string> names;
  auto check = [&](const DatasetCurve& c, bool is_prediction) {
    if (c.name.empty()) throw InputError("dataset: curve without a name");
    if (!names.insert(c.name).second) throw InputError("dataset: duplicate curve name '" + c.name + "'");
    if (!(c.log10_k_fz >= -20.0 && c.log10_k_fz <= -10.0)) {
      throw InputError("dataset: curve '" + c.name + "' has log10_k_fz outside [-20, -10]");
    }
    if (is_prediction != (c.split == Split::Prediction)) {
      throw InputError("dataset: curve '" + c.name + "' has split '" + std::string(to_string(c.split)) +
                       "' in the wrong slot");
    }
  };
  for (const auto& c : curves) check(c, false);
  if (prediction) check(*prediction, true);
}

std::size_t Dataset::count(Split s) const {
  if (s == Split::Prediction) return prediction ? 1 : 0;
  return static_cast<std::size_t>(
      std::count_if(curves.begin(), curves.end(), [s](const DatasetCurve& c) { return c.split == s; }));
}

namespace {

const ordered_json& require(const ordered_json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw InputError(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

DatasetCurve read_entry(const ordered_json& e, const std::filesystem::path& dir, const std::string& where,
                        bool is_prediction) {
  DatasetCurve c{.name = {}, .log10_k_fz = 0.0, .split = Split::Prediction,
                 .curve = core::TimeSeries({0.0}, {0.0})};
  try {
    const auto& path = require(e, "path", where);
    const auto& logk = require(e, "log10_k_fz", where);
    if (!path.is_string() || !logk.is_number()) throw InputError(where + ": bad path or log10_k_fz type");
    c.log10_k_fz = logk.get<double>();
    const auto file = dir / path.get<std::string>();
    c.name = e.contains("name") ? e.at("name").get<std::string>() : std::filesystem::path(path.get<std::string>()).stem().string();
    if (!is_prediction) c.split = split_from_string(require(e, "split", where).get<std::string>());
    c.curve = core::read_time_series_csv(file);
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(where + ": " + ex.what());
  }
  return c;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw InputError("cannot open dataset manifest " + manifest.string());
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(manifest.string() + ": " + ex.what());
  }
  const auto dir = manifest.parent_path();
  Dataset data;
  const auto where = manifest.string();
  if (doc.contains("curves")) {
    const auto& list = doc.at("curves");
    if (!list.is_array()) throw InputError(where + ": \"curves\" must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      data.curves.push_back(read_entry(list[i], dir, where + ": curves[" + std::to_string(i) + "]", false));
    }
  }
  if (doc.contains("prediction") && !doc.at("prediction").is_null()) {
    data.prediction = read_entry(doc.at("prediction"), dir, where + ": prediction", true);
  }
  data.validate();
  return data;
}

ordered_json dataset_manifest_json(const Dataset& data, const std::vector<std::string>& paths,
                                   const std::optional<std::string>& prediction_path) {
  if (paths.size() != data.curves.size()) throw InputError("dataset manifest: one path per curve required");
  ordered_json doc;
  doc["curves"] = ordered_json::array();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& c = data.curves[i];
    doc["curves"].push_back({{"name", c.name},
                             {"path", paths[i]},
                             {"log10_k_fz", c.log10_k_fz},
                             {"split", to_string(c.split)}});
  }
  if (data.prediction) {
    if (!prediction_path) throw InputError("dataset manifest: prediction curve needs a path");
    doc["prediction"] = {{"name", data.prediction->name},
                         {"path", *prediction_path},
                         {"log10_k_fz", data.prediction->log10_k_fz}};
  }
  return doc;
}

std::vector<std::string> fit_parameter_names(const rom::RomSpec& spec) {
  std::vector<std::string> names;
  const bool rom2 = spec.kind == rom::RomKind::Rom2;
  for (std::size_t i = 0; i < spec.coeff_functions.size(); ++i) {
    const auto f = "f" + std::to_string(i);
    for (std::size_t p = 0; p < spec.coeff_functions[i].polynomial.coeffs.size(); ++p) {
      names.push_back(f + ".c" + std::to_string(p));
    }
    if (rom2) {
      names.push_back(f + ".exp");
      names.push_back(f + ".sin");
    }
  }
  for (std::size_t j = 0; j < spec.bumps.size(); ++j) names.push_back("bump" + std::to_string(j + 1) + ".m");
  return names;
}

std::vector<double> rom2_prediction_sample_times() { return {0, 20, 25, 40, 60, 80, 100, 120}; }

namespace {

VectorXd pack(const rom::RomSpec& spec) {
  std::vector<double> v;
  const bool rom2 = spec.kind == rom::RomKind::Rom2;
  for (const auto& f : spec.coeff_functions) {
    v.insert(v.end(), f.polynomial.coeffs.begin(), f.polynomial.coeffs.end());
    if (rom2) {
      v.push_back(f.exp_base_coeff);
      v.push_back(f.sin_coeff);
    }
  }
  for (const auto& b : spec.bumps) v.push_back(b.m);
  return Eigen::Map<VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

rom::RomSpec unpack(const rom::RomSpec& tmpl, const VectorXd& v) {
  rom::RomSpec s = tmpl;
  const bool rom2 = s.kind == rom::RomKind::Rom2;
  Eigen::Index k = 0;
  for (auto& f : s.coeff_functions) {
    for (auto& c : f.polynomial.coeffs) c = v[k++];
    if (rom2) {
      f.exp_base_coeff = v[k++];
      f.sin_coeff = v[k++];
    }
  }
  for (auto& b : s.bumps) b.m = v[k++];
  return s;
}

struct Sample {
  double t;
  double k;
  double y;
};

/// Rows of d(power)/d(parameter); the model is linear in every fitted
/// coefficient, so this does not depend on the current values.
MatrixXd design_matrix(const rom::RomSpec& tmpl, const std::vector<Sample>& samples) {
  const auto n = pack(tmpl).size();
  int dmax = 0;
  for (const auto& f : tmpl.coeff_functions) dmax = std::max(dmax, f.polynomial.degree());
  const bool rom2 = tmpl.kind == rom::RomKind::Rom2;
  MatrixXd a(static_cast<Eigen::Index>(samples.size()), n);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto b = rom::rom_basis(samples[s].t, samples[s].k, dmax);
    Eigen::Index col = 0;
    const auto row = static_cast<Eigen::Index>(s);
    for (std::size_t i = 0; i < 4; ++i) {
      const double xi = b.x_powers[i];
      for (std::size_t p = 0; p < tmpl.coeff_functions[i].polynomial.coeffs.size(); ++p) {
        a(row, col++) = xi * b.t_powers[p];
      }
      if (rom2) {
        a(row, col++) = xi * b.exp_term;
        a(row, col++) = xi * b.sin_term;
      }
    }
    for (const auto& bump : tmpl.bumps) {
      a(row, col++) = rom::HeavisideBump{1.0, bump.n, bump.t_center, bump.r}.eval(samples[s].t);
    }
  }
  return a;
}

double k_of(double log10_k) { return std::pow(10.0, log10_k); }

CurveScore score_curve(const rom::RomSpec& spec, const DatasetCurve& c) {
  const auto model = rom::eval_rom_curve(spec, c.curve.times(), k_of(c.log10_k_fz));
  const auto obs = c.curve.values();
  const auto pred = model.values();
  CurveScore out{.name = c.name, .split = c.split, .log10_k_fz = c.log10_k_fz, .metrics = {}, .max_abs_error = 0.0};
  try {
    out.metrics = core::compute_metrics(obs, pred);
  } catch (const UndefinedR2Error&) {
    out.metrics.mse = core::mse(obs, pred);
    out.metrics.rmse = std::sqrt(out.metrics.mse);
    out.metrics.r2 = std::numeric_limits<double>::quiet_NaN();
    out.metrics.n = obs.size();
  }
  for (std::size_t i = 0; i < obs.size(); ++i) out.max_abs_error = std::max(out.max_abs_error, std::abs(pred[i] - obs[i]));
  return out;
}

}  // namespace

std::vector<CurveScore> score(const rom::RomSpec& spec, const Dataset& data) {
  spec.validate();
  data.validate();
  std::vector<CurveScore> out;
  for (const auto& c : data.curves) out.push_back(score_curve(spec, c));
  if (data.prediction) out.push_back(score_curve(spec, *data.prediction));
  return out;
}

FitReport fit_rom(const rom::RomSpec& template_spec, const Dataset& data, const FitOptions& options) {
  template_spec.validate();
  data.validate();
  if (data.count(Split::Train) == 0) throw InputError("fit: the dataset has no training curve");
  if (options.stride == 0) throw InputError("fit: stride must be >= 1");

  std::vector<Sample> samples;
  for (const auto& c : data.curves) {
    if (c.split != Split::Train) continue;
    const auto t = c.curve.times();
    const auto y = c.curve.values();
    for (std::size_t i = 0; i < t.size(); i += options.stride) samples.push_back({t[i], k_of(c.log10_k_fz), y[i]});
  }
  if (!options.prediction_sample_times.empty()) {
    if (!data.prediction) throw InputError("fit: prediction sample times given but the dataset has no prediction curve");
    const auto y = core::resample_linear(data.prediction->curve, options.prediction_sample_times);
    for (std::size_t i = 0; i < y.size(); ++i) {
      samples.push_back({options.prediction_sample_times[i], k_of(data.prediction->log10_k_fz), y[i]});
    }
  }

  const auto names = fit_parameter_names(template_spec);
  std::vector<bool> frozen(names.size(), false);
  for (const auto& f : options.frozen) {
    const auto it = std::find(names.begin(), names.end(), f);
    if (it == names.end()) throw InputError("fit: unknown coefficient '" + f + "' in the frozen list");
    frozen[static_cast<std::size_t>(it - names.begin())] = true;
  }
  std::vector<Eigen::Index> free_idx;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!frozen[i]) free_idx.push_back(static_cast<Eigen::Index>(i));
  }
  if (free_idx.size() > samples.size()) {
    throw InputError("fit: under-determined, " + std::to_string(free_idx.size()) + " free coefficients but only " +
                     std::to_string(samples.size()) + " residuals");
  }

  VectorXd full = pack(template_spec);
  if (options.initial_guess == InitialGuess::MeanConstant) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s.y;
    mean /= static_cast<double>(samples.size());
    for (auto i : free_idx) full[i] = 0.0;
    if (!frozen[0]) full[0] = mean;  // f0.c0 is always the first name
  }

  FitReport report;
  report.diagnostics.residual_count = samples.size();
  report.diagnostics.free_parameter_count = free_idx.size();

  auto residuals = [&](const rom::RomSpec& spec, VectorXd& r) {
    r.resize(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t s = 0; s < samples.size(); ++s) {
      r[static_cast<Eigen::Index>(s)] = rom::eval_rom(spec, samples[s].t, samples[s].k) - samples[s].y;
    }
  };

  if (free_idx.empty()) {
    report.spec = unpack(template_spec, full);
    VectorXd r;
    residuals(report.spec, r);
    report.diagnostics.initial_cost = report.diagnostics.final_cost = r.squaredNorm();
    report.diagnostics.converged = true;
    report.diagnostics.reason = "no free coefficients";
    report.scores = score(report.spec, data);
    return report;
  }

  const MatrixXd design = design_matrix(template_spec, samples);
  MatrixXd jac_free(design.rows(), static_cast<Eigen::Index>(free_idx.size()));
  for (std::size_t c = 0; c < free_idx.size(); ++c) jac_free.col(static_cast<Eigen::Index>(c)) = design.col(free_idx[c]);

  auto expand = [&](const VectorXd& x) {
    VectorXd v = full;
    for (std::size_t c = 0; c < free_idx.size(); ++c) v[free_idx[c]] = x[static_cast<Eigen::Index>(c)];
    return v;
  };

  optim::LmProblem problem;
  problem.residual = [&](const VectorXd& x, VectorXd& r) {
    residuals(unpack(template_spec, expand(x)), r);
    return true;
  };
  problem.jacobian = [&](const VectorXd&, const VectorXd&, MatrixXd& j) {
    j = jac_free;
    return true;
  };
  VectorXd x0(static_cast<Eigen::Index>(free_idx.size()));
  for (std::size_t c = 0; c < free_idx.size(); ++c) x0[static_cast<Eigen::Index>(c)] = full[free_idx[c]];

  optim::LmOptions lm;
  lm.max_iterations = options.max_iterations;
  lm.ftol = options.ftol;
  lm.gtol = options.gtol;
  const auto res = optim::levenberg_marquardt(problem, x0, lm);

  report.spec = unpack(template_spec, expand(res.x));
  auto& d = report.diagnostics;
  d.iterations = res.iterations;
  d.evaluations = res.evaluations;
  d.initial_cost = res.initial_cost;
  d.final_cost = res.cost;
  d.converged = res.converged;
  d.reason = res.reason;
  report.scores = score(report.spec, data);
  return report;
}

ordered_json to_json(const std::vector<CurveScore>& scores) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : scores) {
    ordered_json e;
    e["name"] = s.name;
    e["split"] = to_string(s.split);
    e["log10_k_fz"] = s.log10_k_fz;
    e["n"] = s.metrics.n;
    if (std::isfinite(s.metrics.r2)) {
      e["r2"] = s.metrics.r2;
    } else {
      e["r2"] = nullptr;
    }
    e["mse"] = s.metrics.mse;
    e["rmse"] = s.metrics.rmse;
    e["max_abs_error"] = s.max_abs_error;
    arr.push_back(std::move(e));
  }
  return arr;
}

ordered_json to_json(const FitReport& report) {
  const auto& d = report.diagnostics;
  ordered_json doc;
  doc["rom"] = rom::to_json(report.spec);
  doc["scores"] = to_json(report.scores);
  doc["diagnostics"] = {{"iterations", d.iterations},
                        {"evaluations", d.evaluations},
                        {"initial_cost", d.initial_cost},
                        {"final_cost", d.final_cost},
                        {"residual_count", d.residual_count},
                        {"free_parameter_count", d.free_parameter_count},
                        {"converged", d.converged},
                        {"reason", d.reason}};
  return doc;
}

std::string format_score_table(const std::vector<CurveScore>& scores) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-10s %9s %5s %12s %12s %12s %12s\n", "curve", "split", "log10_k", "n",
                "r2", "mse", "rmse", "max_err");
  out << line;
  for (const auto& s : scores) {
    std::snprintf(line, sizeof line, "%-20s %-10s %9.4f %5zu %12.6f %12.6g %12.6g %12.6g\n", s.name.c_str(),
                  std::string(to_string(s.split)).c_str(), s.log10_k_fz, s.metrics.n, s.metrics.r2, s.metrics.mse,
                  s.metrics.rmse, s.max_abs_error);
    out << line;
  }
  return out.str();
}

}  // namespace egs::regression
