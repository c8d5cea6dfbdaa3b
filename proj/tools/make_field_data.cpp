// Writes the bundled synthetic "field" curve: the simulator at the default
// (calibrated constant-injection) parameters plus fixed-seed smooth
// fluctuations. It is a stand-in for field data, not a measurement.
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

#include "egs/core/csv.hpp"
#include "egs/rom/rom.hpp"
#include "egs/sim/simulator.hpp"

namespace {

// Raw engine output scaled by hand so the values do not depend on the
// standard library's distribution implementations.
double uniform(std::mt19937_64& gen, double lo, double hi) {
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data/synthetic_field";
  constexpr std::uint64_t kSeed = 20170613;
  constexpr int kFluctuations = 5;

  egs::sim::ReservoirConfig cfg;
  const auto times = egs::core::linspace_step(0.0, 120.0, 1.0);
  const auto base = egs::sim::run(cfg, 120.0, times).power;
  double mean = 0.0;
  for (double v : base.values()) mean += v;
  mean /= static_cast<double>(base.size());

  // Each fluctuation is a rise and a matching fall a few days later.
  std::mt19937_64 gen(kSeed);
  std::vector<egs::rom::HeavisideBump> bumps;
  for (int i = 0; i < kFluctuations; ++i) {
    const double start = uniform(gen, 5.0, 100.0);
    const double length = uniform(gen, 3.0, 15.0);
    const double amplitude = uniform(gen, -0.08, 0.08) * std::abs(mean) / 2.0;
    const double sharpness = uniform(gen, 0.5, 2.0);
    bumps.push_back({amplitude, sharpness, start, 1.0});
    bumps.push_back({-amplitude, sharpness, start + length, 1.0});
  }
  std::vector<double> values(base.values().begin(), base.values().end());
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (const auto& b : bumps) values[i] += b.eval(times[i]);
  }

  std::filesystem::create_directories(dir);
  egs::core::write_time_series_csv(dir / "field_power.csv", egs::core::TimeSeries(times, values));
  nlohmann::ordered_json doc;
  doc["synthetic"] = true;
  doc["description"] =
      "Synthetic stand-in for field power data: simulator output at the default parameters plus "
      "fixed-seed smooth fluctuations. Not a measurement.";
  doc["seed"] = kSeed;
  doc["curves"] = nlohmann::ordered_json::array();
  doc["prediction"] = {{"name", "field"}, {"path", "field_power.csv"}, {"log10_k_fz", std::log10(cfg.k_fz)}};
  std::ofstream(dir / "dataset.json") << doc.dump(2) << "\n";
  std::cout << "wrote " << (dir / "field_power.csv").string() << " (base mean " << mean << " MW)\n";
  return 0;
}
