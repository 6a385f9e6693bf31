#include "socev/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace socev {

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::window: return "window";
    case ConstraintKind::capacity: return "capacity";
    case ConstraintKind::peak_rate: return "peak_rate";
    case ConstraintKind::negative_rate: return "negative_rate";
    case ConstraintKind::exceeds_command: return "exceeds_command";
  }
  return "unknown";
}

void validate_session(const SessionSpec& s, int horizon) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("session " + std::to_string(s.id) + ": " + what);
  };
  const bool finite = std::isfinite(s.x_initial) && std::isfinite(s.x_final) &&
                      std::isfinite(s.u_star) && std::isfinite(s.alpha);
  if (!finite) fail("non-finite field");
  if (s.t_arrival < 0 || s.t_arrival >= s.t_depart || s.t_depart > horizon)
    fail("window must satisfy 0 <= t_arrival < t_depart <= horizon");
  if (s.x_initial < 0.0 || s.x_initial > s.x_final) fail("need 0 <= x_initial <= x_final");
  if (!(s.u_star > 0.0)) fail("u_star must be positive");
  if (s.alpha < 0.0) fail("alpha must be nonnegative");
  if (!(s.u_star - s.alpha * s.x_final > 0.0)) fail("target unreachable: u_star - alpha * x_final <= 0");
}

void validate_config(const StationConfig& c) {
  if (c.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(c.delta > 0.0) || !std::isfinite(c.delta)) throw std::invalid_argument("delta must be > 0");
  if (c.capacity.size() < static_cast<std::size_t>(c.horizon))
    throw std::invalid_argument("capacity series shorter than horizon");
  for (double p : c.capacity)
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("capacity entries must be >= 0");
}

double peak_rate(const SessionSpec& spec, double x) {
  return std::max(spec.u_star - spec.alpha * x, 0.0);
}

double evolve_state(double x, double u, double delta) { return x + delta * u; }

bool target_met(const SessionSpec& spec, double x) { return x >= spec.x_final - kDoneTolerance; }

ActiveSet active_sessions(std::span<const SessionSpec> specs, std::span<const double> x, int t) {
  if (x.size() != specs.size()) throw std::invalid_argument("active_sessions: state count mismatch");
  ActiveSet set{t, {}};
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (specs[i].present_at(t) && !target_met(specs[i], x[i])) set.members.push_back(i);
  return set;
}

std::vector<Violation> validate_schedule(const ScheduleMatrix& sched,
                                         std::span<const SessionSpec> specs,
                                         const StationConfig& config) {
  if (sched.vehicles() != specs.size())
    throw std::invalid_argument("validate_schedule: vehicle count mismatch");
  if (sched.steps() != static_cast<std::size_t>(config.horizon) ||
      config.capacity.size() < sched.steps())
    throw std::invalid_argument("validate_schedule: step count mismatch");

  std::vector<Violation> out;
  const int steps = config.horizon;
  std::vector<double> x(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) x[i] = specs[i].x_initial;

  for (int t = 0; t < steps; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    double total = 0.0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const double u = sched.applied(i, ts);
      total += u;
      if (u < 0.0) out.push_back({ConstraintKind::negative_rate, i, t, -u});
      if (u > sched.commanded(i, ts) + kFeasibilityTolerance)
        out.push_back({ConstraintKind::exceeds_command, i, t, u - sched.commanded(i, ts)});
      if (!specs[i].present_at(t)) {
        if (u != 0.0) out.push_back({ConstraintKind::window, i, t, std::abs(u)});
        continue;
      }
      const double limit = peak_rate(specs[i], x[i]);
      if (u > limit + kFeasibilityTolerance)
        out.push_back({ConstraintKind::peak_rate, i, t, u - limit});
      x[i] = evolve_state(x[i], u, config.delta);
    }
    const double cap = config.capacity_at(t);
    if (total > cap + kFeasibilityTolerance)
      out.push_back({ConstraintKind::capacity, std::nullopt, t, total - cap});
  }
  return out;
}

std::vector<double> clip_to_limits(std::span<const double> commanded, std::span<const double> x,
                                   std::span<const SessionSpec> specs) {
  if (commanded.size() != specs.size() || x.size() != specs.size())
    throw std::invalid_argument("clip_to_limits: size mismatch");
  std::vector<double> applied(commanded.size());
  for (std::size_t i = 0; i < commanded.size(); ++i)
    applied[i] = std::min(commanded[i], peak_rate(specs[i], x[i]));
  return applied;
}

}  // namespace socev
