#include "egs/sensitivity/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <Eigen/QR>

#include "egs/core/csv.hpp"
#include "egs/core/error.hpp"
#include "egs/core/parallel.hpp"
#include "egs/sim/simulator.hpp"

namespace egs::sensitivity {

using nlohmann::ordered_json;

std::vector<double> ParameterRange::samples() const {
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const double f = count > 1 ? static_cast<double>(i) / (count - 1) : 0.0;
    out[static_cast<std::size_t>(i)] =
        spacing == Spacing::Log ? lower * std::pow(upper / lower, f) : lower + f * (upper - lower);
  }
  if (count > 1) {
    out.front() = lower;
    out.back() = upper;
  }
  return out;
}

void SweepPlan::validate() const {
  if (!(horizon_days > 0.0) || !(output_step_days > 0.0) || output_step_days > horizon_days) {
    throw InputError("sweep plan: need 0 < output_step_days <= horizon_days");
  }
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    const auto name = std::string(core::to_string(r.parameter));
    for (std::size_t j = 0; j < i; ++j) {
      if (ranges[j].parameter == r.parameter) throw InputError("sweep plan: " + name + " listed twice");
    }
    if (r.count < 2) throw InputError("sweep plan: " + name + " needs at least 2 samples");
    if (!(std::isfinite(r.lower) && std::isfinite(r.upper) && r.lower <= r.upper)) {
      throw InputError("sweep plan: " + name + " needs finite bounds with lower <= upper");
    }
    if (r.spacing == Spacing::Log && !(r.lower > 0.0)) {
      throw InputError("sweep plan: log-spaced " + name + " needs positive bounds");
    }
    const double b = core::get(base, r.parameter);
    const double tol = 1e-9 * std::max(std::abs(b), std::abs(r.upper));
    if (b < r.lower - tol || b > r.upper + tol) {
      throw InputError("sweep plan: " + name + " range neither contains nor abuts the base value");
    }
  }
}

SweepPlan default_plan() {
  SweepPlan p;
  p.ranges = {{core::Parameter::KFz, 1e-16, 1e-14, 7, Spacing::Log},
              {core::Parameter::WellFactor, 1.78e-13, 5.62e-13, 5, Spacing::Log},
              {core::Parameter::PBhp, 9.5e6, 11e6, 4, Spacing::Linear},
              {core::Parameter::QInj, 7.5, 8.5, 3, Spacing::Linear}};
  return p;
}

SweepPlan plan_from_json(const ordered_json& doc) {
  SweepPlan p = default_plan();
  try {
    if (!doc.is_object()) throw InputError("sweep plan: expected a JSON object");
    for (const auto& [key, _] : doc.items()) {
      if (key != "base" && key != "ranges" && key != "horizon_days" && key != "output_step_days") {
        throw InputError("sweep plan: unknown key '" + key + "'");
      }
    }
    if (doc.contains("base")) {
      for (const auto& [key, value] : doc.at("base").items()) core::set(p.base, core::parameter_from_string(key), value.get<double>());
    }
    if (doc.contains("horizon_days")) p.horizon_days = doc.at("horizon_days").get<double>();
    if (doc.contains("output_step_days")) p.output_step_days = doc.at("output_step_days").get<double>();
    if (doc.contains("ranges")) {
      p.ranges.clear();
      for (const auto& r : doc.at("ranges")) {
        ParameterRange range;
        range.parameter = core::parameter_from_string(r.at("parameter").get<std::string>());
        range.lower = r.at("lower").get<double>();
        range.upper = r.at("upper").get<double>();
        range.count = r.at("count").get<int>();
        const auto spacing = r.value("spacing", std::string("linear"));
        if (spacing == "log") {
          range.spacing = Spacing::Log;
        } else if (spacing != "linear") {
          throw InputError("sweep plan: spacing must be 'linear' or 'log'");
        }
        p.ranges.push_back(range);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("sweep plan: ") + e.what());
  } catch (const UsageError& e) {
    throw InputError(std::string("sweep plan: ") + e.what());
  }
  p.validate();
  return p;
}

SweepPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open sweep plan " + path.string());
  try {
    return plan_from_json(ordered_json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

ordered_json to_json(const SweepPlan& plan) {
  ordered_json doc;
  for (auto p : core::kAllParameters) doc["base"][std::string(core::to_string(p))] = core::get(plan.base, p);
  doc["horizon_days"] = plan.horizon_days;
  doc["output_step_days"] = plan.output_step_days;
  doc["ranges"] = ordered_json::array();
  for (const auto& r : plan.ranges) {
    doc["ranges"].push_back({{"parameter", core::to_string(r.parameter)},
                             {"lower", r.lower},
                             {"upper", r.upper},
                             {"count", r.count},
                             {"spacing", r.spacing == Spacing::Log ? "log" : "linear"}});
  }
  return doc;
}

double influence_score(const std::vector<std::vector<double>>& curves, double base_mean) {
  if (curves.empty()) return 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < curves.front().size(); ++i) {
    double lo = curves.front()[i], hi = lo;
    for (const auto& c : curves) {
      lo = std::min(lo, c[i]);
      hi = std::max(hi, c[i]);
    }
    spread = std::max(spread, hi - lo);
  }
  return base_mean != 0.0 ? spread / std::abs(base_mean) : spread;
}

std::vector<core::Parameter> rank(const std::vector<std::pair<core::Parameter, double>>& scores) {
  auto sorted = scores;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return static_cast<int>(a.first) < static_cast<int>(b.first);
  });
  std::vector<core::Parameter> out;
  for (const auto& s : sorted) out.push_back(s.first);
  return out;
}

namespace {

using Key = std::array<double, 4>;

Key key_of(const core::ParameterSet& p) { return {p.k_fz, p.well_factor, p.p_bhp, p.q_inj}; }

}  // namespace

SensitivityReport run_sweep(const sim::ReservoirConfig& config, const SweepPlan& plan, int workers) {
  plan.validate();
  const bool sweeps_rate = std::any_of(plan.ranges.begin(), plan.ranges.end(),
                                       [](const auto& r) { return r.parameter == core::Parameter::QInj; });
  if (sweeps_rate && config.injection.series) {
    throw InputError("sweep: q_inj cannot be swept with a time-varying injection schedule");
  }

  // Distinct parameter points, base first, in plan order.
  std::vector<core::ParameterSet> points = {plan.base};
  std::map<Key, std::size_t> index = {{key_of(plan.base), 0}};
  std::vector<std::vector<std::size_t>> family_points;
  std::vector<std::vector<double>> family_values;
  for (const auto& r : plan.ranges) {
    family_values.push_back(r.samples());
    auto& ids = family_points.emplace_back();
    for (double v : family_values.back()) {
      auto ps = plan.base;
      core::set(ps, r.parameter, v);
      const auto [it, inserted] = index.emplace(key_of(ps), points.size());
      if (inserted) points.push_back(ps);
      ids.push_back(it->second);
    }
  }

  const auto times = core::linspace_step(0.0, plan.horizon_days, plan.output_step_days);
  std::vector<SampleRun> results(points.size());
  core::parallel_for(points.size(), workers, [&](std::size_t i) {
    auto cfg = config;
    cfg.apply(points[i]);
    results[i].value = 0.0;
    try {
      results[i].power = sim::run(cfg, plan.horizon_days, times).power;
    } catch (const Error& e) {
      results[i].error = e.what();
    }
  });
  if (!results[0].power) throw NumericalError("sweep: base-point simulation failed: " + results[0].error);

  SensitivityReport rep;
  rep.times = times;
  rep.base_curve = *results[0].power;
  const auto base_values = rep.base_curve.values();
  for (double v : base_values) rep.base_mean_mw += v;
  rep.base_mean_mw /= static_cast<double>(base_values.size());
  rep.simulations = static_cast<int>(points.size());

  std::vector<std::pair<core::Parameter, double>> scored;
  for (std::size_t f = 0; f < plan.ranges.size(); ++f) {
    ParameterFamily fam;
    fam.parameter = plan.ranges[f].parameter;
    std::vector<std::vector<double>> curves;
    for (std::size_t s = 0; s < family_points[f].size(); ++s) {
      SampleRun run = results[family_points[f][s]];
      run.value = family_values[f][s];
      if (run.power) curves.emplace_back(run.power->values().begin(), run.power->values().end());
      fam.runs.push_back(std::move(run));
    }
    if (curves.size() >= 2) {
      fam.score = influence_score(curves, rep.base_mean_mw);
      scored.emplace_back(fam.parameter, *fam.score);
    } else {
      rep.unranked.push_back(fam.parameter);
    }
    rep.families.push_back(std::move(fam));
  }
  rep.ranking = rank(scored);
  rep.ranking.insert(rep.ranking.end(), rep.unranked.begin(), rep.unranked.end());
  return rep;
}

std::vector<std::filesystem::path> export_curves(const SensitivityReport& report, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  if (report.families.empty()) return written;
  std::filesystem::create_directories(dir);
  for (const auto& fam : report.families) {
    const auto path = dir / ("sweep_" + std::string(core::to_string(fam.parameter)) + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "time_days";
    std::vector<const core::TimeSeries*> cols;
    for (const auto& r : fam.runs) {
      if (!r.power) continue;
      out << ',' << core::to_string(fam.parameter) << '=' << core::format_double(r.value);
      cols.push_back(&*r.power);
    }
    out << '\n';
    for (std::size_t i = 0; i < report.times.size(); ++i) {
      out << core::format_double(report.times[i]);
      for (const auto* c : cols) out << ',' << core::format_double(c->values()[i]);
      out << '\n';
    }
    if (!out) throw InputError("error writing " + path.string());
    written.push_back(path);
  }
  return written;
}

ordered_json to_json(const SensitivityReport& report) {
  ordered_json doc;
  doc["base_mean_mw"] = report.base_mean_mw;
  doc["simulations"] = report.simulations;
  doc["ranking"] = ordered_json::array();
  for (auto p : report.ranking) doc["ranking"].push_back(core::to_string(p));
  doc["unranked"] = ordered_json::array();
  for (auto p : report.unranked) doc["unranked"].push_back(core::to_string(p));
  doc["families"] = ordered_json::array();
  for (const auto& fam : report.families) {
    ordered_json f;
    f["parameter"] = core::to_string(fam.parameter);
    f["score"] = fam.score ? ordered_json(*fam.score) : ordered_json(nullptr);
    f["samples"] = ordered_json::array();
    for (const auto& r : fam.runs) {
      ordered_json s = {{"value", r.value}, {"ok", r.power.has_value()}};
      if (r.power) {
        const auto v = r.power->values();
        s["power_min_mw"] = *std::min_element(v.begin(), v.end());
        s["power_max_mw"] = *std::max_element(v.begin(), v.end());
      } else {
        s["error"] = r.error;
      }
      f["samples"].push_back(std::move(s));
    }
    doc["families"].push_back(std::move(f));
  }
  return doc;
}

double linear_fit_deviation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("linear fit: need >= 2 paired samples");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(y.size()));
  double scale = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    a(static_cast<Eigen::Index>(i), 1) = x[i];
    b[static_cast<Eigen::Index>(i)] = y[i];
    scale = std::max(scale, std::abs(y[i]));
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  const double worst = (a * coef - b).lpNorm<Eigen::Infinity>();
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace egs::sensitivity
