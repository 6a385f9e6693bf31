#include "socev/policies.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace socev {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::es: return "es";
    case PolicyKind::edf: return "edf";
    case PolicyKind::mpc: return "mpc";
    case PolicyKind::soc_mpc: return "soc_mpc";
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (PolicyKind k : all_policies())
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::vector<PolicyKind> all_policies() {
  return {PolicyKind::es, PolicyKind::edf, PolicyKind::mpc, PolicyKind::soc_mpc};
}

std::vector<double> water_fill(std::span<const double> limits, double capacity) {
  std::vector<double> out(limits.size(), 0.0);
  std::vector<std::size_t> idx(limits.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return limits[a] < limits[b]; });

  double remaining = std::max(capacity, 0.0);
  std::size_t left = idx.size();
  for (std::size_t k = 0; k < idx.size(); ++k, --left) {
    const double level = remaining / static_cast<double>(left);
    const double lim = std::max(limits[idx[k]], 0.0);
    if (lim <= level) {
      out[idx[k]] = lim;
      remaining -= lim;
      continue;
    }
    // Every remaining entry has a limit above the level.
    for (std::size_t r = k; r < idx.size(); ++r) out[idx[r]] = level;
    break;
  }
  return out;
}

std::vector<double> greedy_fill(std::span<const std::size_t> order, std::span<const double> limits,
                                double capacity) {
  std::vector<double> out(limits.size(), 0.0);
  double remaining = std::max(capacity, 0.0);
  for (std::size_t i : order) {
    const double give = std::min(std::max(limits[i], 0.0), remaining);
    out[i] = give;
    remaining -= give;
    if (remaining <= 0.0) break;
  }
  return out;
}

std::vector<std::size_t> deadline_order(std::span<const SessionSpec> active) {
  std::vector<std::size_t> order(active.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    const auto& sa = active[a];
    const auto& sb = active[b];
    if (sa.t_depart != sb.t_depart) return sa.t_depart < sb.t_depart;
    if (sa.t_arrival != sb.t_arrival) return sa.t_arrival < sb.t_arrival;
    return sa.id < sb.id;
  });
  return order;
}

std::vector<double> baseline_limits(std::span<const SessionSpec> active, std::span<const double> x,
                                    double delta, BaselineLimits mode) {
  if (x.size() != active.size()) throw std::invalid_argument("baseline_limits: size mismatch");
  std::vector<double> lim(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    const double ceiling = mode == BaselineLimits::nominal ? active[i].u_star : peak_rate(active[i], x[i]);
    lim[i] = std::min(ceiling, std::max(active[i].x_final - x[i], 0.0) / delta);
  }
  return lim;
}

std::vector<double> equal_share(std::span<const SessionSpec> active, std::span<const double> x,
                                double capacity, double delta, BaselineLimits mode) {
  const auto lim = baseline_limits(active, x, delta, mode);
  return water_fill(lim, capacity);
}

std::vector<double> edf(std::span<const SessionSpec> active, std::span<const double> x,
                        double capacity, double delta, BaselineLimits mode) {
  const auto lim = baseline_limits(active, x, delta, mode);
  const auto order = deadline_order(active);
  return greedy_fill(order, lim, capacity);
}

std::vector<double> MpcPlan::at(int t) const {
  std::vector<double> out(rates.size(), 0.0);
  if (t < window.start || t >= window.end) return out;
  for (std::size_t i = 0; i < rates.size(); ++i) out[i] = rates[i][static_cast<std::size_t>(t - window.start)];
  return out;
}

namespace {

MpcPlan plan_with(bool soc_aware, std::span<const SessionSpec> active, std::span<const double> x,
                  const StationConfig& config, int t, const SolverOptions& opts) {
  const SolveWindow window = solve_window(active, t);
  const auto prog = soc_aware ? build_soc_mpc_program(active, x, config, window, opts.weights())
                              : build_mpc_program(active, x, config, window, opts.weights());
  const auto sol = solve(prog, opts);

  MpcPlan plan;
  plan.window = window;
  plan.rates.assign(active.size(), std::vector<double>(static_cast<std::size_t>(window.length()), 0.0));
  for (std::size_t k = 0; k < prog.num_vars; ++k) {
    const auto& v = prog.vars[k];
    // Interior-point iterates sit strictly inside u >= 0.
    plan.rates[v.slot][static_cast<std::size_t>(v.t - window.start)] =
        std::max(sol.u[static_cast<Eigen::Index>(k)], 0.0);
  }
  plan.status = sol.status;
  plan.kkt_residual = sol.kkt_residual;
  plan.objective = sol.objective_value;
  plan.iterations = sol.iterations;
  return plan;
}

}  // namespace

MpcPlan plan_mpc(std::span<const SessionSpec> active, std::span<const double> x,
                 const StationConfig& config, int t, const SolverOptions& opts) {
  return plan_with(false, active, x, config, t, opts);
}

MpcPlan plan_soc_mpc(std::span<const SessionSpec> active, std::span<const double> x,
                     const StationConfig& config, int t, const SolverOptions& opts) {
  return plan_with(true, active, x, config, t, opts);
}

std::vector<double> mpc_policy(std::span<const SessionSpec> active, std::span<const double> x,
                               const StationConfig& config, int t, const SolverOptions& opts) {
  return plan_mpc(active, x, config, t, opts).first_step();
}

std::vector<double> soc_mpc_policy(std::span<const SessionSpec> active, std::span<const double> x,
                                   const StationConfig& config, int t, const SolverOptions& opts) {
  return plan_soc_mpc(active, x, config, t, opts).first_step();
}

}  // namespace socev
