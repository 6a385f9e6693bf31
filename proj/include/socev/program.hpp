#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <span>
#include <vector>

#include "socev/model.hpp"

namespace socev {

/// Parameters of the shifted proportional-fairness objective
///   sum_k log(u_k + eps_log) - lambda * sum_i (x_i,end - x_i,final)^2
struct ProgramWeights {
  double lambda = 10.0;
  double eps_log = 1e-3;
};

/// Half-open step range [start, end) covered by one receding-horizon solve.
struct SolveWindow {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
};

enum class RowKind {
  capacity,  // sum_i u_i(t) <= P(t)
  rate,      // per-(i,t) peak-rate bound, rolled out over the window for SOC-aware programs
  energy,    // delta * sum_t u_i(t) <= x_final - x_start
};

struct VariableRef {
  std::size_t slot = 0;  // position of the vehicle in the active list passed to the builder
  int t = 0;
};

/// Variables [first, first + count) belong to one vehicle, ordered by time.
struct VehicleBlock {
  std::size_t slot = 0;
  std::size_t first = 0;
  std::size_t count = 0;
  double x_start = 0.0;
  double x_target = 0.0;
  double delta = 1.0;
};

/// Concave program: maximize the shifted objective subject to A u <= b, u >= 0.
/// Terminal energy of block g is x_start + delta * sum of its variables.
struct ConvexProgram {
  std::size_t num_vars = 0;
  std::vector<VariableRef> vars;
  std::vector<VehicleBlock> blocks;
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  Eigen::VectorXd b;
  std::vector<RowKind> row_kinds;
  ProgramWeights weights;
  SolveWindow window;

  std::size_t num_rows() const { return row_kinds.size(); }
  std::size_t count_rows(RowKind kind) const;
};

/// Window from t to the latest departure among `active`.
SolveWindow solve_window(std::span<const SessionSpec> active, int t);

/// Fixed-limit program: u_i(t) <= u_star_i.
/// `x` holds the current energy of each active vehicle. Throws std::invalid_argument
/// when no active vehicle has a step inside the window.
ConvexProgram build_mpc_program(std::span<const SessionSpec> active, std::span<const double> x,
                                const StationConfig& config, SolveWindow window,
                                const ProgramWeights& weights = {});

/// SOC-aware program: the peak-rate law rolled out over the window,
///   u_i(t) + alpha_i * delta * sum_{s<t} u_i(s) <= u_star_i - alpha_i * x_i(start).
ConvexProgram build_soc_mpc_program(std::span<const SessionSpec> active, std::span<const double> x,
                                    const StationConfig& config, SolveWindow window,
                                    const ProgramWeights& weights = {});

double objective_value(const Eigen::VectorXd& u, const ConvexProgram& prog);
Eigen::VectorXd objective_gradient(const Eigen::VectorXd& u, const ConvexProgram& prog);

/// Terminal energy x_start + delta * sum(u) of each block.
Eigen::VectorXd block_end_energy(const Eigen::VectorXd& u, const ConvexProgram& prog);

}  // namespace socev
