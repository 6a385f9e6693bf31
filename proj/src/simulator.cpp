#include "socev/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

namespace socev {

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::arrival: return "arrival";
    case EventKind::departure: return "departure";
    case EventKind::target_met: return "target_met";
    case EventKind::horizon_end: return "horizon_end";
  }
  return "unknown";
}

double ScenarioResult::mean_final_state() const {
  if (vehicles.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& v : vehicles) sum += v.x_end;
  return sum / static_cast<double>(vehicles.size());
}

namespace {

struct Dispatcher {
  std::span<const SessionSpec> specs;
  const StationConfig& config;
  PolicyKind policy;
  const RunOptions& opts;

  std::optional<MpcPlan> plan;
  std::vector<std::size_t> plan_members;

  // Commanded rates for every session at step t.
  std::vector<double> dispatch(const ActiveSet& active, std::span<const double> x, bool events,
                               AggregateMetrics& agg) {
    std::vector<double> out(specs.size(), 0.0);
    if (active.members.empty()) {
      plan.reset();
      plan_members.clear();
      return out;
    }
    std::vector<SessionSpec> sub;
    std::vector<double> xs;
    sub.reserve(active.members.size());
    for (std::size_t i : active.members) {
      sub.push_back(specs[i]);
      xs.push_back(x[i]);
    }
    const double p = config.capacity_at(active.t);

    if (policy == PolicyKind::es || policy == PolicyKind::edf) {
      const auto r = policy == PolicyKind::es ? equal_share(sub, xs, p, config.delta, opts.baseline_limits)
                                              : edf(sub, xs, p, config.delta, opts.baseline_limits);
      for (std::size_t k = 0; k < r.size(); ++k) out[active.members[k]] = r[k];
      return out;
    }

    if (events || !plan || plan_members != active.members) {
      plan = policy == PolicyKind::mpc ? plan_mpc(sub, xs, config, active.t, opts.solver)
                                       : plan_soc_mpc(sub, xs, config, active.t, opts.solver);
      plan_members = active.members;
      ++agg.solves;
      if (plan->status != SolveStatus::converged) ++agg.solver_failures;
    }
    const auto r = plan->at(active.t);
    for (std::size_t k = 0; k < r.size(); ++k) out[plan_members[k]] = r[k];
    return out;
  }
};

}  // namespace

ScenarioResult run(std::span<const SessionSpec> specs, const StationConfig& config, PolicyKind policy,
                   const RunOptions& opts) {
  validate_config(config);
  for (const auto& s : specs) validate_session(s, config.horizon);
  opts.solver.validate();

  const std::size_t nv = specs.size();
  const int horizon = config.horizon;

  ScenarioResult res;
  res.policy = to_string(policy);
  res.delta = config.delta;
  res.schedule = ScheduleMatrix(nv, static_cast<std::size_t>(horizon));
  res.vehicles.resize(nv);

  std::vector<double> x(nv);
  std::vector<std::size_t> newly_met;
  for (std::size_t i = 0; i < nv; ++i) {
    x[i] = specs[i].x_initial;
    res.vehicles[i].id = specs[i].id;
    if (target_met(specs[i], x[i])) {
      res.vehicles[i].target_met = true;
      res.vehicles[i].completion_step = specs[i].t_arrival;
    }
  }

  Dispatcher dispatcher{specs, config, policy, opts, std::nullopt, {}};
  auto& agg = res.aggregate;

  auto emit_events = [&](int t) {
    const std::size_t before = res.events.size();
    for (std::size_t i = 0; i < nv; ++i)
      if (specs[i].t_depart == t) res.events.push_back({t, EventKind::departure, specs[i].id});
    for (std::size_t i : newly_met) res.events.push_back({t, EventKind::target_met, specs[i].id});
    newly_met.clear();
    for (std::size_t i = 0; i < nv; ++i)
      if (specs[i].t_arrival == t) res.events.push_back({t, EventKind::arrival, specs[i].id});
    return res.events.size() > before;
  };

  for (int t = 0; t < horizon; ++t) {
    const bool events = emit_events(t);
    const ActiveSet active = active_sessions(specs, x, t);
    const auto commanded = dispatcher.dispatch(active, x, events, agg);
    const auto applied = clip_to_limits(commanded, x, specs);

    StepRecord row{t, config.capacity_at(t), 0.0, 0.0, active.members.size()};
    const auto ts = static_cast<std::size_t>(t);
    for (std::size_t i = 0; i < nv; ++i) {
      res.schedule.commanded(i, ts) = commanded[i];
      res.schedule.applied(i, ts) = applied[i];
      row.commanded += commanded[i];
      row.applied += applied[i];
      x[i] = evolve_state(x[i], applied[i], config.delta);
      if (specs[i].present_at(t) && !res.vehicles[i].target_met && target_met(specs[i], x[i])) {
        res.vehicles[i].target_met = true;
        res.vehicles[i].completion_step = t + 1;
        newly_met.push_back(i);
      }
    }
    res.steps.push_back(row);
  }
  emit_events(horizon);
  res.events.push_back({horizon, EventKind::horizon_end, std::nullopt});

  double applied_total = 0.0;
  double commanded_total = 0.0;
  std::size_t met = 0;
  for (std::size_t i = 0; i < nv; ++i) {
    double sum = 0.0;
    for (double u : res.schedule.applied_row(i)) sum += u;
    double cmd = 0.0;
    for (double u : res.schedule.commanded_row(i)) cmd += u;
    auto& v = res.vehicles[i];
    v.delivered = config.delta * sum;
    v.x_end = x[i];
    if (v.target_met) ++met;
    applied_total += sum;
    commanded_total += cmd;
  }
  agg.delivered = config.delta * applied_total;
  agg.commanded = config.delta * commanded_total;
  agg.clipped = std::max(agg.commanded - agg.delivered, 0.0);
  agg.feasible_rate = nv == 0 ? 1.0 : static_cast<double>(met) / static_cast<double>(nv);
  return res;
}

std::vector<ScenarioResult> compare(std::span<const SessionSpec> specs, const StationConfig& config,
                                    std::span<const PolicyKind> policies, const RunOptions& opts,
                                    unsigned workers) {
  std::vector<ScenarioResult> out(policies.size());
  parallel_for(policies.size(), workers,
               [&](std::size_t k) { out[k] = run(specs, config, policies[k], opts); });
  return out;
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  auto body = [&](std::atomic<std::size_t>& next) {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  std::atomic<std::size_t> next{0};
  const std::size_t threads = std::min<std::size_t>(std::max(workers, 1u), count);
  if (threads <= 1) {
    body(next);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back([&] { body(next); });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace socev
