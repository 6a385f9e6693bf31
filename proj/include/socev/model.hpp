#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace socev {

/// Terminal-constraint tolerance: a session is fulfilled once x >= x_final - kDoneTolerance (kWh).
inline constexpr double kDoneTolerance = 1e-6;

/// Absolute tolerance (kW) used when checking capacity and peak-rate constraints.
inline constexpr double kFeasibilityTolerance = 1e-9;

/// One charging request. Energies in kWh, rates in kW, alpha in kW/kWh.
/// The session is plugged in over the half-open step window [t_arrival, t_depart).
struct SessionSpec {
  std::size_t id = 0;
  double x_initial = 0.0;
  double x_final = 0.0;
  int t_arrival = 0;
  int t_depart = 1;
  double u_star = 0.0;
  double alpha = 0.0;

  bool present_at(int t) const { return t_arrival <= t && t < t_depart; }
  double requested_energy() const { return x_final - x_initial; }

  friend bool operator==(const SessionSpec&, const SessionSpec&) = default;
};

struct StationConfig {
  std::vector<double> capacity;  // P(t), kW
  double delta = 0.25;           // hours per step
  int horizon = 96;              // T, steps

  double capacity_at(int t) const { return capacity.at(static_cast<std::size_t>(t)); }

  friend bool operator==(const StationConfig&, const StationConfig&) = default;
};

struct BatteryState {
  std::size_t vehicle = 0;
  int t = 0;
  double x = 0.0;
};

/// Row-major |V| x T matrices of commanded and applied rates.
class ScheduleMatrix {
 public:
  ScheduleMatrix() = default;
  ScheduleMatrix(std::size_t vehicles, std::size_t steps)
      : vehicles_(vehicles), steps_(steps), commanded_(vehicles * steps, 0.0),
        applied_(vehicles * steps, 0.0) {}

  std::size_t vehicles() const { return vehicles_; }
  std::size_t steps() const { return steps_; }

  double& commanded(std::size_t i, std::size_t t) { return commanded_[i * steps_ + t]; }
  double commanded(std::size_t i, std::size_t t) const { return commanded_[i * steps_ + t]; }
  double& applied(std::size_t i, std::size_t t) { return applied_[i * steps_ + t]; }
  double applied(std::size_t i, std::size_t t) const { return applied_[i * steps_ + t]; }

  std::span<const double> commanded_row(std::size_t i) const {
    return {commanded_.data() + i * steps_, steps_};
  }
  std::span<const double> applied_row(std::size_t i) const {
    return {applied_.data() + i * steps_, steps_};
  }

  friend bool operator==(const ScheduleMatrix&, const ScheduleMatrix&) = default;

 private:
  std::size_t vehicles_ = 0;
  std::size_t steps_ = 0;
  std::vector<double> commanded_;
  std::vector<double> applied_;
};

struct ActiveSet {
  int t = 0;
  std::vector<std::size_t> members;  // indices into the session list, ascending
};

enum class ConstraintKind { window, capacity, peak_rate, negative_rate, exceeds_command };

std::string to_string(ConstraintKind kind);

struct Violation {
  ConstraintKind kind;
  std::optional<std::size_t> vehicle;  // empty for station-level (capacity) violations
  int t;
  double magnitude;
};

/// Throws std::invalid_argument when a session breaks its invariants for the given horizon.
void validate_session(const SessionSpec& spec, int horizon);
void validate_config(const StationConfig& config);

/// Peak acceptable rate at stored energy x: max(u_star - alpha * x, 0).
double peak_rate(const SessionSpec& spec, double x);

double evolve_state(double x, double u, double delta);

bool target_met(const SessionSpec& spec, double x);

/// Sessions plugged in at t whose target is still unmet. `x` holds the current
/// energy of every session, indexed like `specs`.
ActiveSet active_sessions(std::span<const SessionSpec> specs, std::span<const double> x, int t);

/// Checks window, capacity, peak-rate, sign and applied<=commanded constraints on the
/// applied schedule, with battery states rolled forward from x_initial.
/// Throws std::invalid_argument on dimension mismatch.
std::vector<Violation> validate_schedule(const ScheduleMatrix& schedule,
                                         std::span<const SessionSpec> specs,
                                         const StationConfig& config);

/// applied(i) = min(commanded(i), peak_rate(spec_i, x_i)) for every entry.
std::vector<double> clip_to_limits(std::span<const double> commanded, std::span<const double> x,
                                   std::span<const SessionSpec> specs);

}  // namespace socev
