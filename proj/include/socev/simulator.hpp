#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socev/model.hpp"
#include "socev/policies.hpp"
#include "socev/solver.hpp"

namespace socev {

enum class EventKind { arrival, departure, target_met, horizon_end };

std::string to_string(EventKind kind);

/// Events stamped t are handled before dispatch at t. Within a step the order is
/// departures, target_met, arrivals.
struct SimEvent {
  int t = 0;
  EventKind kind = EventKind::arrival;
  std::optional<std::size_t> vehicle;  // session id

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

struct StepRecord {
  int t = 0;
  double capacity = 0.0;   // kW
  double commanded = 0.0;  // kW, summed over vehicles
  double applied = 0.0;    // kW, summed over vehicles
  std::size_t active = 0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct VehicleRecord {
  std::size_t id = 0;
  double delivered = 0.0;  // kWh
  double x_end = 0.0;      // kWh
  bool target_met = false;
  std::optional<int> completion_step;  // first t with x(t) at target

  friend bool operator==(const VehicleRecord&, const VehicleRecord&) = default;
};

struct AggregateMetrics {
  double delivered = 0.0;      // kWh
  double feasible_rate = 1.0;  // fraction of sessions that met their target
  double clipped = 0.0;        // kWh removed by clipping
  double commanded = 0.0;      // kWh commanded before clipping
  std::size_t solves = 0;
  std::size_t solver_failures = 0;

  friend bool operator==(const AggregateMetrics&, const AggregateMetrics&) = default;
};

struct ScenarioResult {
  std::string policy;
  double delta = 0.25;
  std::vector<StepRecord> steps;
  std::vector<VehicleRecord> vehicles;
  AggregateMetrics aggregate;
  ScheduleMatrix schedule;
  std::vector<SimEvent> events;

  double mean_final_state() const;

  friend bool operator==(const ScenarioResult&, const ScenarioResult&) = default;
};

struct RunOptions {
  SolverOptions solver;
  BaselineLimits baseline_limits = BaselineLimits::nominal;
};

/// Simulates one policy over the horizon. MPC-type policies re-solve when an event
/// fires and otherwise replay the stored plan; every step is clipped to the true
/// peak rate before states advance. Throws std::invalid_argument on invalid input.
ScenarioResult run(std::span<const SessionSpec> specs, const StationConfig& config, PolicyKind policy,
                   const RunOptions& opts = {});

/// One result per policy, in the order given. Runs are spread over up to `workers`
/// threads; the output does not depend on the worker count.
std::vector<ScenarioResult> compare(std::span<const SessionSpec> specs, const StationConfig& config,
                                    std::span<const PolicyKind> policies, const RunOptions& opts = {},
                                    unsigned workers = 1);

/// Calls fn(i) for i in [0, count) on up to `workers` threads. Exceptions are
/// rethrown on the calling thread (the one with the lowest index wins).
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace socev
