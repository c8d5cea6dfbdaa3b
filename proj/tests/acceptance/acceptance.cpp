// Acceptance runner: one PASS/FAIL line per criterion, then a summary.
// Exit status is nonzero if any numbered criterion fails. Lines marked INFO
// report known, documented gaps and do not affect the exit status.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "egs/calib/calibrate.hpp"
#include "egs/cli/cli.hpp"
#include "egs/regression/regression.hpp"
#include "egs/rom/rom.hpp"
#include "egs/sensitivity/sensitivity.hpp"
#include "egs/sim/simulator.hpp"
#include "oracle/rom_oracle.hpp"

namespace {

using namespace egs;
namespace fs = std::filesystem;
using nlohmann::json;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string name;
  double budget_s;  // runtime limit; <= 0 means none
  std::function<Verdict()> check;
  bool informational = false;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("egs_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "egs");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << "  cli " << args[1] << " ... exited " << code << ": " << err.str();
  return code;
}

// ------------------------------------------------------------------------

Verdict rom_oracle() {
  std::mt19937_64 gen(42);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  std::vector<std::pair<double, double>> points;
  for (int i = 0; i < 200; ++i) {
    const double t = uniform(0.0, 120.0);
    points.emplace_back(t, std::pow(10.0, uniform(-16.0, -13.0)));
  }
  double worst = 0.0;
  double eval_seconds = 0.0;
  int failures = 0;
  for (auto kind : {rom::RomKind::Rom1, rom::RomKind::Rom2, rom::RomKind::Rom3}) {
    for (auto policy : {rom::CoefficientPolicy::Corrected, rom::CoefficientPolicy::AsPrinted}) {
      const bool printed = policy == rom::CoefficientPolicy::AsPrinted;
      const auto tables = kind == rom::RomKind::Rom1   ? oracle::oracle_rom1(printed)
                          : kind == rom::RomKind::Rom2 ? oracle::oracle_rom2(printed)
                                                       : oracle::oracle_rom3();
      const auto spec = rom::builtin_rom(kind, policy);
      std::vector<double> got;
      const auto start = std::chrono::steady_clock::now();
      for (const auto& [t, k] : points) got.push_back(rom::eval_rom(spec, t, k));
      eval_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double want = static_cast<double>(oracle::oracle_eval(tables, points[i].first, points[i].second));
        const double rel = std::abs(got[i] - want) / std::abs(want);
        worst = std::max(worst, rel);
        failures += !(rel <= 1e-12);
      }
    }
  }
  return {failures == 0 && eval_seconds < 1.0,
          "1200 evaluations (3 ROMs x 2 policies x 200 points), worst relative error " + fmt(worst, 3) +
              " (tol 1e-12), eval time " + fmt(eval_seconds, 3) + " s"};
}

Verdict pipeline() {
  const auto dir = scratch("pipeline");
  const auto d = (dir / "d").string(), f = (dir / "f").string();
  if (cli({"--out", d, "dataset", "--standard-split"}) != 0) return {false, "dataset command failed"};
  if (cli({"--out", f, "fit", "--dataset", d + "/dataset.json", "--rom", "3"}) != 0) return {false, "fit failed"};
  const auto doc = json::parse(slurp(fs::path(f) / "fit.json"));
  bool pass = true;
  std::string train = "train R2", validate = "validate R2";
  for (const auto& s : doc["scores"]) {
    const double r2 = s["r2"].is_number() ? s["r2"].get<double>() : -INFINITY;
    if (s["split"] == "train") {
      pass = pass && r2 >= 0.80;
      train += " " + fmt(r2, 3);
    } else if (s["split"] == "validate") {
      pass = pass && r2 >= 0.75;
      validate += " " + fmt(r2, 3);
    }
  }
  fs::remove_all(dir);
  return {pass, train + " (>= 0.80); " + validate + " (>= 0.75); 20^3 cells"};
}

Verdict conservation() {
  const auto r = sim::run(sim::ReservoirConfig{}, 120.0, core::linspace_step(0.0, 120.0, 1.0));
  double mass = 0.0, energy = 0.0;
  for (const auto& s : r.steps) {
    mass = std::max(mass, s.mass_balance_residual);
    energy = std::max(energy, s.energy_balance_residual);
  }
  return {mass <= 1e-8 && energy <= 1e-8 && r.max_temperature_excursion <= 1e-6,
          std::to_string(r.steps.size()) + " steps; max mass residual " + fmt(mass, 3) + ", max energy residual " +
              fmt(energy, 3) + " (tol 1e-8); max temperature excursion " + fmt(r.max_temperature_excursion, 3) +
              " K (tol 1e-6)"};
}

Verdict ranking() {
  const auto rep = sensitivity::run_sweep(sim::ReservoirConfig{}, sensitivity::default_plan(), 1);
  const std::vector<core::Parameter> want = {core::Parameter::KFz, core::Parameter::WellFactor,
                                             core::Parameter::PBhp, core::Parameter::QInj};
  std::string order;
  for (auto p : rep.ranking) order += std::string(order.empty() ? "" : ", ") + std::string(core::to_string(p));
  // Linearity of the injection-rate family at the first output day.
  double deviation = INFINITY;
  for (const auto& fam : rep.families) {
    if (fam.parameter != core::Parameter::QInj) continue;
    std::vector<double> x, y;
    for (const auto& run : fam.runs) {
      if (!run.power) continue;
      x.push_back(run.value);
      y.push_back(run.power->values()[1]);
    }
    deviation = sensitivity::linear_fit_deviation(x, y);
  }
  return {rep.ranking == want && deviation <= 0.02,
          "ranking [" + order + "]; q_inj linear-fit deviation " + fmt(deviation, 3) + " (tol 0.02); " +
              std::to_string(rep.simulations) + " simulations"};
}

Verdict twin() {
  sim::ReservoirConfig truth;  // defaults are the constant-injection calibrated case
  truth.k_fz = 7.75e-16;
  truth.well_factor = 3.163e-13;
  truth.p_bhp = 9.5e6;
  const auto t = core::linspace_step(0.0, 120.0, 1.0);
  calib::CalibrationProblem p;
  p.observed = calib::simulate_at(truth, core::TimeSeries(t, std::vector<double>(t.size(), 0.0)));
  p.base = truth;
  // Perturbed by a factor of 3, downward for the bottom-hole pressure so the
  // guess stays below the initial reservoir pressure.
  p.base.k_fz *= 3.0;
  p.base.well_factor *= 3.0;
  p.base.p_bhp /= 3.0;
  for (auto c : {calib::CalibParameter::KFz, calib::CalibParameter::WellFactor, calib::CalibParameter::PBhp}) {
    p.free.push_back(calib::default_free_parameter(c, p.base));
  }
  const auto r = calib::calibrate(p);
  const double truths[] = {truth.k_fz, truth.well_factor, truth.p_bhp};
  bool pass = r.metrics.r2 >= 0.999;
  std::string detail;
  for (std::size_t j = 0; j < 3; ++j) {
    const double err = std::abs(r.values[j] / truths[j] - 1.0);
    pass = pass && err <= 0.05;
    detail += std::string(calib::to_string(r.free[j].parameter)) + " error " + fmt(100.0 * err, 3) + "%; ";
  }
  return {pass, detail + "R2 " + fmt(r.metrics.r2, 10) + " (>= 0.999); " + std::to_string(r.iterations) +
                    " iterations, " + std::to_string(r.simulations) + " simulations"};
}

Verdict exact_fit() {
  const std::vector<std::pair<double, regression::Split>> grid = {
      {-14.0, regression::Split::Train},     {-14.444, regression::Split::Train},
      {-14.667, regression::Split::Train},   {-14.889, regression::Split::Train},
      {-15.333, regression::Split::Train},   {-14.222, regression::Split::Validate},
      {-15.111, regression::Split::Validate}};
  const auto times = core::linspace_step(0.0, 120.0, 1.0);
  bool pass = true;
  std::string detail;
  for (auto [kind, degree] : {std::pair{rom::RomKind::Rom3, 10}, std::pair{rom::RomKind::Rom1, 4}}) {
    const auto truth = rom::builtin_rom(kind);
    regression::Dataset data;
    for (auto [lk, split] : grid) {
      data.curves.push_back({"k" + fmt(lk, 6), lk, split, rom::eval_rom_curve(truth, times, std::pow(10.0, lk))});
    }
    rom::RomSpec blank;
    blank.kind = kind;
    for (auto& fn : blank.coeff_functions) fn.polynomial.coeffs.assign(static_cast<std::size_t>(degree) + 1, 0.0);
    const auto rep = regression::fit_rom(blank, data);
    double max_err = 0.0, r2_gap = 0.0;
    for (const auto& s : rep.scores) {
      if (s.split == regression::Split::Train) max_err = std::max(max_err, s.max_abs_error);
      r2_gap = std::max(r2_gap, std::abs(s.metrics.r2 - 1.0));
    }
    pass = pass && max_err <= 1e-6 && r2_gap <= 1e-9;
    detail += std::string(rom::to_string(kind)) + ": max train error " + fmt(max_err, 3) + " MW, max |R2 - 1| " +
              fmt(r2_gap, 3) + "; ";
  }
  return {pass, detail + "tol 1e-6 MW and 1e-9"};
}

Verdict power_formula() {
  const double p = sim::net_power_mw(6.0, 438.0, 7.5, 298.15, 4187.0);
  // 4187 (6.0 * 438 - 7.5 * 298.15) = 1 640 780.625 W exactly; 1.6408 is its
  // four-digit rounding.
  const double hand = 1.640780625;
  return {std::abs(p - hand) <= 1e-6, "net power " + fmt(p, 12) + " MW vs hand value " + fmt(hand, 12) +
                                          " MW (printed as 1.6408), tol 1e-6"};
}

Verdict determinism() {
  const auto dir = scratch("determinism");
  auto path = [&](const std::string& rel) { return (dir / rel).string(); };
  std::ofstream(dir / "small.cfg") << "grid = 10, 10, 10\ndt_days = 1\n";
  std::ofstream(dir / "plan.json") << R"({"horizon_days": 20, "ranges": [
      {"parameter": "k_fz", "lower": 1e-16, "upper": 1e-14, "count": 3, "spacing": "log"},
      {"parameter": "q_inj", "lower": 7.5, "upper": 8.5, "count": 2}]})";
  if (cli({"--out", path("sim"), "simulate", "--config", path("small.cfg"), "--t-end", "30"}) != 0 ||
      cli({"--out", path("d"), "dataset", "--config", path("small.cfg"), "--standard-split", "--t-end", "30"}) != 0) {
    return {false, "could not prepare inputs"};
  }
  const std::vector<std::vector<std::string>> commands = {
      {"simulate", "--config", path("small.cfg"), "--t-end", "30"},
      {"--workers", "2", "dataset", "--config", path("small.cfg"), "--standard-split", "--t-end", "30"},
      {"fit", "--dataset", path("d/dataset.json"), "--rom", "3"},
      {"score", "--rom", "2", "--dataset", (fs::path(EGS_DATA_DIR) / "synthetic_field" / "dataset.json").string()},
      {"--workers", "2", "calibrate", "--config", path("small.cfg"), "--observed", path("sim/power.csv"), "--free",
       "k_fz,well_factor", "--max-iterations", "5"},
      {"--workers", "2", "sweep", "--config", path("small.cfg"), "--plan", path("plan.json")},
      {"eval-rom", "--rom", "3", "--k", "7.75e-16", "--t", "0:120:1"}};
  auto snapshot = [](const fs::path& d) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(d)) {
      if (e.is_regular_file()) files[fs::relative(e.path(), d).generic_string()] = slurp(e.path());
    }
    return files;
  };
  std::size_t files = 0;
  std::string differing;
  for (const auto& cmd : commands) {
    auto args = cmd;
    args.insert(args.begin(), {"--out", path("run")});
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
      fs::remove_all(path("run"));
      if (cli(args) != 0) return {false, "command failed: " + cmd[cmd[0] == "--workers" ? 2 : 0]};
      auto snap = snapshot(path("run"));
      if (rep == 0) {
        first = std::move(snap);
        files += first.size();
      } else if (snap != first) {
        differing += " " + cmd[cmd[0] == "--workers" ? 2 : 0];
      }
    }
  }
  fs::remove_all(dir);
  return {differing.empty(), differing.empty()
                                 ? "7 subcommands run twice each, " + std::to_string(files) +
                                       " files byte-identical (manifests included)"
                                 : "outputs differ for:" + differing};
}

Verdict refinement() {
  const auto t = core::linspace_step(0.0, 120.0, 1.0);
  sim::ReservoirConfig coarse, fine;
  fine.cells = {28, 28, 28};
  const auto run_a = sim::run(coarse, 120.0, t);
  const auto run_b = sim::run(fine, 120.0, t);
  const auto a = run_a.power.values();
  const auto b = run_b.power.values();
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  const double rel = std::sqrt(diff / norm);
  return {rel < 0.15, "relative L2 difference of the base power curve, 20^3 vs 28^3: " + fmt(rel, 3) +
                          " (limit 0.15); single-cell well index is mesh dependent, see README"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"1", "ROM oracle equivalence", 0.0, rom_oracle},
      {"2", "Pipeline R2 on the 7-curve permeability split", 600.0, pipeline},
      {"3", "Conservation and maximum principle", 0.0, conservation},
      {"4", "Sensitivity ranking and q_inj linearity", 900.0, ranking},
      {"5", "Twin-experiment calibration", 1200.0, twin},
      {"6", "Exact-fit property", 0.0, exact_fit},
      {"7", "Power formula unit check", 0.0, power_formula},
      {"8", "CLI determinism", 0.0, determinism},
      {"grid", "Grid refinement 20^3 vs 28^3", 0.0, refinement, true},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      v.pass = false;
      v.detail += "; over the " + fmt(c.budget_s, 4) + " s budget";
    }
    const std::string tag = c.informational ? "INFO " : "";
    std::cout << tag << (v.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << v.detail << " ("
              << fmt(secs, 3) << " s)" << std::endl;
    if (!v.pass && !c.informational) ++failed;
  }
  std::cout << (failed == 0 ? "ALL CRITERIA PASS" : std::to_string(failed) + " CRITERIA FAIL") << std::endl;
  return failed == 0 ? 0 : 1;
}
