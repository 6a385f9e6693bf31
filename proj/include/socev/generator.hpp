#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socev/model.hpp"
#include "socev/scenario.hpp"

namespace socev {

struct UniformRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct StepRange {
  int lo = 1;
  int hi = 1;
};

struct GeneratorParams {
  std::vector<double> intensity;  // expected arrivals per step; one entry per step
  std::optional<std::size_t> session_count;  // draw exactly this many arrivals instead
  StepRange stay{16, 40};                    // steps, inclusive
  UniformRange x_initial{5.0, 20.0};         // kWh
  UniformRange requested{5.0, 25.0};         // kWh
  double u_star = 6.6;                       // kW
  double alpha = 0.1;                        // kW/kWh
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on unordered or negative bounds or intensities.
  void validate() const;
};

/// Arrival intensity: a Gaussian bump, or a constant rate when one is set.
struct IntensityShape {
  double peak_step = 32.0;
  double width = 4.0;            // steps
  double expected_total = 20.0;  // arrivals over the horizon
  std::optional<double> constant_rate;  // arrivals per step

  std::vector<double> build(int horizon) const;
};

/// Named synthetic setup: generator parameters plus the station grid and the
/// congestion ratio used to size capacity. generate_synthetic rebuilds
/// params.intensity from `intensity` on the setup's horizon.
struct SyntheticSetup {
  std::string name;
  GeneratorParams params;
  IntensityShape intensity;
  double delta = 0.25;
  int horizon = 96;
  double congestion_ratio = 0.5;
};

std::vector<std::string> preset_names();
/// Throws std::invalid_argument for unknown names.
SyntheticSetup preset(std::string_view name);

/// Gaussian bump over [0, horizon) scaled so the intensities sum to expected_total.
std::vector<double> gaussian_intensity(int horizon, double peak_step, double width, double expected_total);

/// Random stream used by the generator: std::mt19937_64 with sampling written out
/// explicitly so results do not depend on the standard library's distributions.
class ScenarioRng {
 public:
  explicit ScenarioRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                          // [0, 1) with 53 random bits
  double uniform(double lo, double hi);      // [lo, hi)
  int integer(int lo, int hi);               // inclusive
  std::uint64_t poisson(double mean);
  std::size_t categorical(std::span<const double> cumulative);

 private:
  std::mt19937_64 engine_;
};

/// Poisson arrivals per step (or a fixed count drawn from the normalized intensity),
/// with stay, initial energy and request drawn uniformly. Departures are clamped to
/// the horizon. Capacity is taken from `config` as given.
ScenarioFile generate(const GeneratorParams& params, const StationConfig& config);

/// max over t of the summed u_star of sessions plugged in at t.
double peak_nominal_demand(std::span<const SessionSpec> sessions, int horizon);

/// Flat capacity at ratio * peak_nominal_demand.
std::vector<double> congested_capacity(std::span<const SessionSpec> sessions, int horizon, double ratio);

/// generate() on the setup's grid, then capacity sized by its congestion ratio.
ScenarioFile generate_synthetic(const SyntheticSetup& setup);

}  // namespace socev
