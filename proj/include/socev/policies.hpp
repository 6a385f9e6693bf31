#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socev/model.hpp"
#include "socev/program.hpp"
#include "socev/solver.hpp"

namespace socev {

enum class PolicyKind { es, edf, mpc, soc_mpc };

/// CLI names: "es", "edf", "mpc", "soc_mpc".
std::string to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);
std::vector<PolicyKind> all_policies();

/// Which per-vehicle ceiling the ES and EDF baselines allocate against.
/// `nominal` uses u_star and leaves the true SOC limit to downstream clipping;
/// `soc_aware` consults peak_rate at the current state.
enum class BaselineLimits { nominal, soc_aware };

/// Water-filling: every entry gets min(level, limit) with the common level chosen so
/// the total equals min(capacity, sum of limits).
std::vector<double> water_fill(std::span<const double> limits, double capacity);

/// Serves entries in `order`, each up to its limit, until capacity runs out.
std::vector<double> greedy_fill(std::span<const std::size_t> order, std::span<const double> limits,
                                double capacity);

/// Earliest departure first; ties by earlier arrival, then lower id.
std::vector<std::size_t> deadline_order(std::span<const SessionSpec> active);

/// Rate ceiling per active vehicle: the nominal or SOC limit, further capped by the
/// rate that would exactly finish the remaining requested energy within one step.
std::vector<double> baseline_limits(std::span<const SessionSpec> active, std::span<const double> x,
                                    double delta, BaselineLimits mode);

std::vector<double> equal_share(std::span<const SessionSpec> active, std::span<const double> x,
                                double capacity, double delta,
                                BaselineLimits mode = BaselineLimits::nominal);

std::vector<double> edf(std::span<const SessionSpec> active, std::span<const double> x,
                        double capacity, double delta, BaselineLimits mode = BaselineLimits::nominal);

/// Receding-horizon plan from one solve: rates[slot][t - window.start].
struct MpcPlan {
  SolveWindow window;
  std::vector<std::vector<double>> rates;
  SolveStatus status = SolveStatus::infeasible_input;
  double kkt_residual = 0.0;
  double objective = 0.0;
  int iterations = 0;

  /// Rates of every slot at step t (zero outside the window).
  std::vector<double> at(int t) const;
  std::vector<double> first_step() const { return at(window.start); }
};

MpcPlan plan_mpc(std::span<const SessionSpec> active, std::span<const double> x,
                 const StationConfig& config, int t, const SolverOptions& opts = {});
MpcPlan plan_soc_mpc(std::span<const SessionSpec> active, std::span<const double> x,
                     const StationConfig& config, int t, const SolverOptions& opts = {});

/// First-step rates of the fixed-limit plan. These may exceed the true SOC limit.
std::vector<double> mpc_policy(std::span<const SessionSpec> active, std::span<const double> x,
                               const StationConfig& config, int t, const SolverOptions& opts = {});
std::vector<double> soc_mpc_policy(std::span<const SessionSpec> active, std::span<const double> x,
                                   const StationConfig& config, int t,
                                   const SolverOptions& opts = {});

}  // namespace socev
