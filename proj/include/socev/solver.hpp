#pragma once

#include <Eigen/Core>

#include <string>

#include "socev/program.hpp"

namespace socev {

/// lambda and eps_log parameterize program construction (see weights()); solve()
/// itself reads them from the program it is given.
struct SolverOptions {
  double kkt_tol = 1e-6;
  int max_iters = 500;
  double eps_log = 1e-3;  // kW
  double lambda = 10.0;

  ProgramWeights weights() const { return {lambda, eps_log}; }

  /// Throws std::invalid_argument unless kkt_tol > 0, eps_log > 0, lambda >= 0, max_iters >= 0.
  void validate() const;
};

enum class SolveStatus { converged, iteration_limit, infeasible_input };

std::string to_string(SolveStatus status);

/// First-order optimality residuals of a point for
///   minimize -objective(u)  s.t.  A u <= b,  u >= 0
/// with row multipliers z and bound multipliers w.
struct KktResiduals {
  double stationarity = 0.0;     // || -grad + A^T z - w ||_inf
  double primal = 0.0;           // max violation of A u <= b and u >= 0
  double complementarity = 0.0;  // max |z_r s_r|, |w_k u_k|
  double dual_sign = 0.0;        // max negativity of z, w

  double max() const;
};

KktResiduals kkt_residuals(const ConvexProgram& prog, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& row_duals, const Eigen::VectorXd& bound_duals);

struct Solution {
  Eigen::VectorXd u;
  double objective_value = 0.0;
  double kkt_residual = 0.0;
  SolveStatus status = SolveStatus::infeasible_input;
  int iterations = 0;
  Eigen::VectorXd row_duals;    // one per row of A
  Eigen::VectorXd bound_duals;  // one per variable, for u >= 0
};

/// Maximizes the program's concave objective with a primal-dual interior-point method. Iterates stay strictly feasible, so the returned u satisfies A u <= b and
/// u >= 0 whatever the status. Deterministic for fixed inputs.
Solution solve(const ConvexProgram& prog, const SolverOptions& opts = {});

}  // namespace socev
