#include "socev/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace socev {

void GeneratorParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("generator: " + what); };
  for (double r : intensity)
    if (!(r >= 0.0) || !std::isfinite(r)) fail("intensities must be finite and >= 0");
  if (stay.lo < 1 || stay.hi < stay.lo) fail("stay bounds must satisfy 1 <= lo <= hi");
  if (!(x_initial.lo >= 0.0) || x_initial.hi < x_initial.lo) fail("x_initial bounds must satisfy 0 <= lo <= hi");
  if (!(requested.lo >= 0.0) || requested.hi < requested.lo) fail("requested bounds must satisfy 0 <= lo <= hi");
  if (!(u_star > 0.0) || !std::isfinite(u_star)) fail("u_star must be > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be >= 0");
  if (session_count && *session_count > 0) {
    double total = 0.0;
    for (double r : intensity) total += r;
    if (!(total > 0.0)) fail("a fixed session count needs a positive intensity somewhere");
  }
}

std::vector<double> gaussian_intensity(int horizon, double peak_step, double width, double expected_total) {
  std::vector<double> out(static_cast<std::size_t>(std::max(horizon, 0)));
  double sum = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const double z = (t - peak_step) / width;
    sum += out[static_cast<std::size_t>(t)] = std::exp(-0.5 * z * z);
  }
  if (sum > 0.0)
    for (double& r : out) r *= expected_total / sum;
  return out;
}

std::vector<double> IntensityShape::build(int horizon) const {
  if (constant_rate) return std::vector<double>(static_cast<std::size_t>(std::max(horizon, 0)), *constant_rate);
  return gaussian_intensity(horizon, peak_step, width, expected_total);
}

std::vector<std::string> preset_names() { return {"synthetic-morning"}; }

SyntheticSetup preset(std::string_view name) {
  if (name == "synthetic-morning") {
    SyntheticSetup s;
    s.name = "synthetic-morning";
    s.delta = 0.25;
    s.horizon = 96;
    s.congestion_ratio = 0.5;
    // 8:00 at 15-minute steps, one-hour spread, 20 expected arrivals
    s.intensity = {32.0, 4.0, 20.0, std::nullopt};
    s.params.intensity = s.intensity.build(s.horizon);
    return s;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

double ScenarioRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double ScenarioRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int ScenarioRng::integer(int lo, int hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return std::min(hi, lo + static_cast<int>(std::floor(uniform() * span)));
}

std::uint64_t ScenarioRng::poisson(double mean) {
  // Knuth's product method; large means are split into chunks to keep exp() representable.
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double chunk = std::min(mean, 30.0);
    mean -= chunk;
    const double limit = std::exp(-chunk);
    double prod = uniform();
    while (prod > limit) {
      ++total;
      prod *= uniform();
    }
  }
  return total;
}

std::size_t ScenarioRng::categorical(std::span<const double> cumulative) {
  const double target = uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

ScenarioFile generate(const GeneratorParams& params, const StationConfig& config) {
  params.validate();
  validate_config(config);
  const int horizon = config.horizon;
  if (params.intensity.size() < static_cast<std::size_t>(horizon))
    throw std::invalid_argument("generator: intensity shorter than horizon");

  ScenarioRng rng(params.seed);
  std::vector<int> arrivals;
  if (params.session_count) {
    std::vector<double> cumulative(static_cast<std::size_t>(horizon));
    double acc = 0.0;
    for (int t = 0; t < horizon; ++t) cumulative[static_cast<std::size_t>(t)] = acc += params.intensity[static_cast<std::size_t>(t)];
    for (std::size_t k = 0; k < *params.session_count; ++k)
      arrivals.push_back(static_cast<int>(rng.categorical(cumulative)));
    std::sort(arrivals.begin(), arrivals.end());
  } else {
    for (int t = 0; t < horizon; ++t) {
      const auto n = rng.poisson(params.intensity[static_cast<std::size_t>(t)]);
      arrivals.insert(arrivals.end(), n, t);
    }
  }

  // Keep targets strictly below the energy where the peak rate reaches zero.
  const double ceiling = params.alpha > 0.0 ? 0.9 * params.u_star / params.alpha : INFINITY;

  ScenarioFile sc;
  sc.metadata.seed = params.seed;
  sc.metadata.source = ScenarioSource::synthetic;
  sc.config = config;
  for (int t : arrivals) {
    if (t >= horizon) continue;
    SessionSpec s;
    s.id = sc.sessions.size();
    s.t_arrival = t;
    s.t_depart = std::min(horizon, t + rng.integer(params.stay.lo, params.stay.hi));
    const double x0 = rng.uniform(params.x_initial.lo, params.x_initial.hi);
    const double req = rng.uniform(params.requested.lo, params.requested.hi);
    s.x_initial = std::min(x0, ceiling);
    s.x_final = std::min(x0 + req, ceiling);
    s.u_star = params.u_star;
    s.alpha = params.alpha;
    sc.sessions.push_back(s);
  }
  return sc;
}

double peak_nominal_demand(std::span<const SessionSpec> sessions, int horizon) {
  double peak = 0.0;
  for (int t = 0; t < horizon; ++t) {
    double sum = 0.0;
    for (const auto& s : sessions)
      if (s.present_at(t)) sum += s.u_star;
    peak = std::max(peak, sum);
  }
  return peak;
}

std::vector<double> congested_capacity(std::span<const SessionSpec> sessions, int horizon, double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw std::invalid_argument("congestion ratio must be > 0");
  return std::vector<double>(static_cast<std::size_t>(horizon), ratio * peak_nominal_demand(sessions, horizon));
}

ScenarioFile generate_synthetic(const SyntheticSetup& setup) {
  StationConfig grid{std::vector<double>(static_cast<std::size_t>(std::max(setup.horizon, 0)), 0.0), setup.delta,
                     setup.horizon};
  if (!(setup.intensity.width > 0.0)) throw std::invalid_argument("generator: intensity width must be > 0");
  GeneratorParams params = setup.params;
  params.intensity = setup.intensity.build(setup.horizon);
  ScenarioFile sc = generate(params, grid);
  sc.metadata.name = setup.name;
  sc.config.capacity = congested_capacity(sc.sessions, setup.horizon, setup.congestion_ratio);
  return sc;
}

}  // namespace socev
