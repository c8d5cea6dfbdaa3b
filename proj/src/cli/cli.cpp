#include "egs/cli/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "egs/calib/calibrate.hpp"
#include "egs/cli/manifest.hpp"
#include "egs/core/csv.hpp"
#include "egs/core/error.hpp"
#include "egs/core/parallel.hpp"
#include "egs/regression/regression.hpp"
#include "egs/rom/rom.hpp"
#include "egs/rom/rom_json.hpp"
#include "egs/sensitivity/sensitivity.hpp"
#include "egs/sim/simulator.hpp"

#ifndef EGS_VERSION
#define EGS_VERSION "0.0.0"
#endif

namespace egs::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<double> parse_time_range(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ':') {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() != 3) throw UsageError("time range '" + std::string(text) + "' is not start:end:step");
  double v[3];
  try {
    for (int i = 0; i < 3; ++i) v[i] = core::parse_double(parts[static_cast<std::size_t>(i)], "time range");
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (!(v[0] >= 0.0 && v[1] >= v[0] && v[2] > 0.0)) {
    throw UsageError("time range '" + std::string(text) + "' needs 0 <= start <= end and step > 0");
  }
  return core::linspace_step(v[0], v[1], v[2]);
}

namespace {

struct Globals {
  std::string out = "out";
  int workers = 1;
  std::string coefficients = "corrected";
};

/// Tracks every artifact written under the output directory.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  fs::path path(const std::string& rel) const { return dir_ / rel; }

  void text(const std::string& rel, const std::string& content) {
    const auto p = path(rel);
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    f << content;
    if (!f) throw InputError("cannot write " + p.string());
    record(rel);
  }
  void json(const std::string& rel, const ordered_json& doc) { text(rel, doc.dump(2) + "\n"); }
  void series(const std::string& rel, const core::TimeSeries& s) {
    std::ostringstream buf;
    core::write_time_series_csv(buf, s);
    text(rel, buf.str());
  }
  void record(const std::string& rel) {
    if (std::find(written_.begin(), written_.end(), rel) == written_.end()) written_.push_back(rel);
  }
  void cleanup() {
    for (const auto& rel : written_) {
      std::error_code ec;
      fs::remove(path(rel), ec);
    }
    written_.clear();
  }
  void finish(RunManifest& m) {
    for (const auto& rel : written_) {
      const auto p = path(rel);
      m.outputs.push_back({rel, sha256_file(p), fs::file_size(p)});
    }
    const auto p = path("manifest.json");
    fs::create_directories(dir_);
    std::ofstream f(p, std::ios::binary);
    f << m.to_json().dump(2) << "\n";
    if (!f) throw InputError("cannot write " + p.string());
  }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

rom::RomKind rom_kind(int n) {
  if (n < 1 || n > 3) throw UsageError("--rom must be 1, 2 or 3");
  return rom::rom_kind_from_int(n);
}

rom::CoefficientPolicy policy(const Globals& g) {
  if (g.coefficients == "corrected") return rom::CoefficientPolicy::Corrected;
  if (g.coefficients == "as-printed") return rom::CoefficientPolicy::AsPrinted;
  throw UsageError("--coefficients must be 'corrected' or 'as-printed'");
}

std::string log_k_name(double log10_k) { return "k" + core::format_double(log10_k); }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  double t_end = 120.0;
  std::string times;
};

void cmd_simulate(const SimulateArgs& a, const Globals&, Outputs& o, RunManifest& m, std::ostream& out) {
  const auto cfg = sim::load_config(a.config);
  m.add_input(a.config);
  if (!(a.t_end > 0.0)) throw UsageError("--t-end must be > 0");
  const auto times = parse_time_range(a.times.empty() ? "0:" + core::format_double(a.t_end) + ":1" : a.times);
  const auto r = sim::run(cfg, a.t_end, times);
  o.series("power.csv", r.power);
  std::ostringstream steps;
  sim::write_step_reports_csv(steps, r.steps);
  o.text("steps.csv", steps.str());
  out << "simulated " << r.steps.size() << " steps to day " << core::format_double(a.t_end) << "; power at end "
      << core::format_double(r.power.values().back()) << " MW\n";
}

// ----------------------------------------------------------------- dataset

struct DatasetArgs {
  std::string config;
  std::string values;
  bool standard_split = false;
  double t_end = 120.0;
  std::string times;
};

struct PlannedCurve {
  double log10_k;
  regression::Split split;
};

void cmd_dataset(const DatasetArgs& a, const Globals& g, Outputs& o, RunManifest& m, std::ostream& out) {
  sim::ReservoirConfig cfg;
  if (!a.config.empty()) {
    cfg = sim::load_config(a.config);
    m.add_input(a.config);
  }
  std::vector<PlannedCurve> plan;
  std::optional<std::pair<fs::path, double>> prediction;
  if (a.standard_split == !a.values.empty()) throw UsageError("dataset: give exactly one of --values or --standard-split");
  if (a.standard_split) {
    for (double lk : {-14.0, -14.444, -14.667, -14.889, -15.333}) plan.push_back({lk, regression::Split::Train});
    for (double lk : {-14.222, -15.111}) plan.push_back({lk, regression::Split::Validate});
  } else {
    std::ifstream in(a.values);
    if (!in) throw InputError("cannot open " + a.values);
    m.add_input(a.values);
    try {
      const auto doc = ordered_json::parse(in);
      for (const auto& e : doc.at("curves")) {
        plan.push_back({e.at("log10_k_fz").get<double>(),
                        regression::split_from_string(e.value("split", std::string("train")))});
      }
      if (doc.contains("prediction")) {
        const auto& p = doc.at("prediction");
        prediction.emplace(fs::path(a.values).parent_path() / p.at("path").get<std::string>(),
                           p.at("log10_k_fz").get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(a.values + ": " + e.what());
    }
  }
  if (plan.empty()) throw InputError("dataset: the permeability list is empty");
  for (std::size_t i = 0; i < plan.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (plan[i].log10_k == plan[j].log10_k) {
        throw InputError("dataset: duplicate log10_k_fz " + core::format_double(plan[i].log10_k));
      }
    }
  }

  const auto times = parse_time_range(a.times.empty() ? "0:" + core::format_double(a.t_end) + ":1" : a.times);
  regression::Dataset data;
  for (const auto& p : plan) {
    data.curves.push_back({log_k_name(p.log10_k), p.log10_k, p.split, core::TimeSeries({0.0}, {0.0})});
  }
  if (prediction) {
    m.add_input(prediction->first);
    data.prediction = regression::DatasetCurve{"prediction", prediction->second, regression::Split::Prediction,
                                               core::read_time_series_csv(prediction->first)};
  }
  data.validate();

  std::vector<std::string> errors(plan.size());
  core::parallel_for(plan.size(), g.workers, [&](std::size_t i) {
    auto c = cfg;
    c.k_fz = std::pow(10.0, plan[i].log10_k);
    try {
      data.curves[i].curve = sim::run(c, a.t_end, times).power;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!errors[i].empty()) {
      throw NumericalError("dataset: simulation at log10_k_fz = " + core::format_double(plan[i].log10_k) +
                           " failed: " + errors[i]);
    }
  }
  std::vector<std::string> paths;
  for (const auto& c : data.curves) {
    paths.push_back("curves/" + c.name + ".csv");
    o.series(paths.back(), c.curve);
  }
  std::optional<std::string> pred_path;
  if (data.prediction) {
    pred_path = "curves/prediction.csv";
    o.series(*pred_path, data.prediction->curve);
  }
  o.json("dataset.json", regression::dataset_manifest_json(data, paths, pred_path));
  out << "wrote " << data.count(regression::Split::Train) << " train and " << data.count(regression::Split::Validate)
      << " validate curves\n";
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string dataset;
  int rom = 3;
  std::size_t stride = 1;
  int max_iterations = 500;
  std::string prediction_samples = "auto";
};

void cmd_fit(const FitArgs& a, const Globals& g, Outputs& o, RunManifest& m, std::ostream& out) {
  const auto kind = rom_kind(a.rom);
  const auto data = regression::load_dataset(a.dataset);
  m.add_input(a.dataset);
  regression::FitOptions opt;
  opt.stride = a.stride;
  opt.max_iterations = a.max_iterations;
  bool use_prediction = false;
  if (a.prediction_samples == "auto") {
    use_prediction = kind == rom::RomKind::Rom2 && data.prediction.has_value();
  } else if (a.prediction_samples == "on") {
    use_prediction = true;
  } else if (a.prediction_samples != "off") {
    throw UsageError("--prediction-samples must be auto, on or off");
  }
  if (use_prediction) opt.prediction_sample_times = regression::rom2_prediction_sample_times();
  const auto report = regression::fit_rom(rom::builtin_rom(kind, policy(g)), data, opt);
  o.json("fit.json", regression::to_json(report));
  o.json("rom.json", rom::to_json(report.spec));
  const auto table = regression::format_score_table(report.scores);
  o.text("scores.txt", table);
  out << table << "converged: " << (report.diagnostics.converged ? "yes" : "no") << " ("
      << report.diagnostics.reason << ")\n";
}

// ------------------------------------------------------------------- score

struct ScoreArgs {
  std::string dataset;
  std::string observed;
  double k = 0.0;
  int rom = 0;
  std::string spec;
};

void cmd_score(const ScoreArgs& a, const Globals& g, Outputs& o, RunManifest& m, std::ostream& out) {
  if ((a.rom != 0) == !a.spec.empty()) throw UsageError("score: give exactly one of --rom or --spec");
  if (a.dataset.empty() == a.observed.empty()) throw UsageError("score: give exactly one of --dataset or --observed");
  rom::RomSpec spec;
  if (a.rom != 0) {
    spec = rom::builtin_rom(rom_kind(a.rom), policy(g));
  } else {
    spec = rom::load_rom(a.spec);
    m.add_input(a.spec);
  }
  regression::Dataset data;
  if (!a.dataset.empty()) {
    data = regression::load_dataset(a.dataset);
    m.add_input(a.dataset);
  } else {
    if (!(a.k > 0.0)) throw UsageError("score: --observed needs --k (m^2)");
    data.prediction = regression::DatasetCurve{"observed", std::log10(a.k), regression::Split::Prediction,
                                               core::read_time_series_csv(a.observed)};
    m.add_input(a.observed);
  }
  const auto scores = regression::score(spec, data);
  ordered_json doc;
  doc["rom"] = rom::to_string(spec.kind);
  doc["coefficients"] = a.rom != 0 ? g.coefficients : "file";
  doc["scores"] = regression::to_json(scores);
  o.json("score.json", doc);
  const auto table = regression::format_score_table(scores);
  o.text("scores.txt", table);
  out << table;
}

// --------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string config;
  std::string observed;
  std::string free = "k_fz,well_factor,p_bhp";
  std::string schedule;
  int max_iterations = 100;
};

void cmd_calibrate(const CalibrateArgs& a, const Globals& g, Outputs& o, RunManifest& m, std::ostream& out) {
  auto cfg = sim::load_config(a.config);
  m.add_input(a.config);
  if (a.schedule == "const") {
    cfg.injection.series.reset();
  } else if (!a.schedule.empty()) {
    cfg.injection.series = core::read_time_series_csv(a.schedule, core::Quantity::MassFlowKgS);
    m.add_input(a.schedule);
  }
  calib::CalibrationProblem p;
  p.observed = core::read_time_series_csv(a.observed);
  m.add_input(a.observed);
  p.base = cfg;
  p.workers = g.workers;
  p.max_iterations = a.max_iterations;
  std::stringstream list(a.free);
  for (std::string name; std::getline(list, name, ',');) {
    if (name.empty()) continue;
    p.free.push_back(calib::default_free_parameter(calib::calib_parameter_from_string(name), cfg));
  }
  const auto r = calib::calibrate(p);
  o.json("calibration.json", calib::to_json(r));
  o.series("best_fit.csv", r.best_fit);
  std::string schedule_ref;
  if (r.config.injection.series) {
    o.series("schedule.csv", *r.config.injection.series);
    schedule_ref = "schedule.csv";
  }
  o.text("calibrated.cfg", sim::format_config(r.config, schedule_ref));
  for (std::size_t j = 0; j < r.free.size(); ++j) {
    out << calib::to_string(r.free[j].parameter) << " = " << core::format_double(r.values[j]) << "\n";
  }
  out << "R2 = " << core::format_double(r.metrics.r2) << ", RMSE = " << core::format_double(r.metrics.rmse)
      << " MW, " << r.iterations << " iterations (" << r.reason << ")\n";
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config;
  std::string plan;
};

void cmd_sweep(const SweepArgs& a, const Globals& g, Outputs& o, RunManifest& m, std::ostream& out) {
  sim::ReservoirConfig cfg;
  if (!a.config.empty()) {
    cfg = sim::load_config(a.config);
    m.add_input(a.config);
  }
  auto plan = sensitivity::default_plan();
  if (!a.plan.empty()) {
    plan = sensitivity::load_plan(a.plan);
    m.add_input(a.plan);
  }
  const auto rep = sensitivity::run_sweep(cfg, plan, g.workers);
  o.json("plan.json", sensitivity::to_json(plan));
  o.json("sweep.json", sensitivity::to_json(rep));
  fs::create_directories(o.path(""));
  for (const auto& p : sensitivity::export_curves(rep, o.path(""))) o.record(p.filename().string());
  out << "ranking:";
  for (auto p : rep.ranking) out << ' ' << core::to_string(p);
  out << "\n";
}

// ---------------------------------------------------------------- eval-rom

struct EvalArgs {
  int rom = 0;
  std::string spec;
  double k = 0.0;
  std::string times = "0:120:1";
};

void cmd_eval_rom(const EvalArgs& a, const Globals& g, Outputs& o, RunManifest& m, std::ostream& out) {
  if ((a.rom != 0) == !a.spec.empty()) throw UsageError("eval-rom: give exactly one of --rom or --spec");
  if (!(a.k > 0.0)) throw UsageError("eval-rom: --k must be > 0");
  rom::RomSpec spec;
  if (a.rom != 0) {
    spec = rom::builtin_rom(rom_kind(a.rom), policy(g));
  } else {
    spec = rom::load_rom(a.spec);
    m.add_input(a.spec);
  }
  const auto times = parse_time_range(a.times);
  const auto curve = rom::eval_rom_curve(spec, times, a.k);
  o.series("eval_rom.csv", curve);
  out << "evaluated " << curve.size() << " points\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Enhanced geothermal system reservoir simulator and reduced-order model toolkit."};
  app.name("egs");
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--workers", g.workers, "Concurrent simulations")->capture_default_str()->check(CLI::Range(1, 256));
  app.add_option("--coefficients", g.coefficients, "Builtin ROM tables: corrected or as-printed")
      ->capture_default_str()
      ->check(CLI::IsMember({"corrected", "as-printed"}));

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the reservoir simulator and write the power curve");
  sim_cmd->add_option("--config", sa.config, "Reservoir config file")->required();
  sim_cmd->add_option("--t-end", sa.t_end, "Horizon in days")->capture_default_str();
  sim_cmd->add_option("--times", sa.times, "Output times start:end:step (default 0:t_end:1)");

  DatasetArgs da;
  auto* ds_cmd = app.add_subcommand("dataset", "Simulate one power curve per permeability and write a dataset");
  ds_cmd->add_option("--config", da.config, "Reservoir config file (default: built-in base case)");
  ds_cmd->add_option("--values", da.values, "JSON list of log10 k_fz values with split labels");
  ds_cmd->add_flag("--standard-split", da.standard_split, "Use the 5 train + 2 validate log-permeability list");
  ds_cmd->add_option("--t-end", da.t_end, "Horizon in days")->capture_default_str();
  ds_cmd->add_option("--times", da.times, "Output times start:end:step");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a ROM template to a dataset");
  fit_cmd->add_option("--dataset", fa.dataset, "Dataset manifest JSON")->required();
  fit_cmd->add_option("--rom", fa.rom, "ROM form 1, 2 or 3")->capture_default_str();
  fit_cmd->add_option("--stride", fa.stride, "Use every n-th training sample")->capture_default_str()->check(
      CLI::PositiveNumber);
  fit_cmd->add_option("--max-iterations", fa.max_iterations, "LM iteration limit")->capture_default_str();
  fit_cmd->add_option("--prediction-samples", fa.prediction_samples,
                      "Add prediction-curve samples at the fixed field times: auto (rom 2 only), on, off")
      ->capture_default_str();

  ScoreArgs sc;
  auto* score_cmd = app.add_subcommand("score", "Score a ROM against a dataset or an observed curve");
  score_cmd->add_option("--dataset", sc.dataset, "Dataset manifest JSON");
  score_cmd->add_option("--observed", sc.observed, "Observed power CSV (scored as the prediction curve)");
  score_cmd->add_option("--k", sc.k, "Permeability for --observed, m^2");
  score_cmd->add_option("--rom", sc.rom, "Builtin ROM 1, 2 or 3");
  score_cmd->add_option("--spec", sc.spec, "ROM JSON file");

  CalibrateArgs ca;
  auto* cal_cmd = app.add_subcommand("calibrate", "Calibrate reservoir parameters against an observed power curve");
  cal_cmd->add_option("--config", ca.config, "Reservoir config file (initial guesses)")->required();
  cal_cmd->add_option("--observed", ca.observed, "Observed power CSV")->required();
  cal_cmd->add_option("--free", ca.free, "Comma-separated free parameters")->capture_default_str();
  cal_cmd->add_option("--schedule", ca.schedule, "'const' or an injection-rate CSV (default: as in config)");
  cal_cmd->add_option("--max-iterations", ca.max_iterations, "LM iteration limit")->capture_default_str();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "One-at-a-time sensitivity sweep and ranking");
  sweep_cmd->add_option("--config", sw.config, "Reservoir config file (default: built-in base case)");
  sweep_cmd->add_option("--plan", sw.plan, "Sweep plan JSON (default: built-in plan)");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval-rom", "Evaluate a ROM on a time grid");
  eval_cmd->add_option("--rom", ea.rom, "Builtin ROM 1, 2 or 3");
  eval_cmd->add_option("--spec", ea.spec, "ROM JSON file");
  eval_cmd->add_option("--k", ea.k, "Fracture-zone permeability, m^2")->required();
  eval_cmd->add_option("--t", ea.times, "Times start:end:step")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto* sub = app.get_subcommands().front();
  RunManifest m;
  m.command = sub->get_name();
  m.arguments.assign(args.begin() + 1, args.end());
  m.output_dir = g.out;
  m.tool_version = EGS_VERSION;
  Outputs o(g.out);
  try {
    if (sub == sim_cmd) cmd_simulate(sa, g, o, m, out);
    if (sub == ds_cmd) cmd_dataset(da, g, o, m, out);
    if (sub == fit_cmd) cmd_fit(fa, g, o, m, out);
    if (sub == score_cmd) cmd_score(sc, g, o, m, out);
    if (sub == cal_cmd) cmd_calibrate(ca, g, o, m, out);
    if (sub == sweep_cmd) cmd_sweep(sw, g, o, m, out);
    if (sub == eval_cmd) cmd_eval_rom(ea, g, o, m, out);
    o.finish(m);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    o.cleanup();
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    o.cleanup();
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    o.cleanup();
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace egs::cli
