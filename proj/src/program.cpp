#include "socev/program.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace socev {

std::size_t ConvexProgram::count_rows(RowKind kind) const {
  return static_cast<std::size_t>(std::count(row_kinds.begin(), row_kinds.end(), kind));
}

SolveWindow solve_window(std::span<const SessionSpec> active, int t) {
  int end = t;
  for (const auto& s : active) end = std::max(end, s.t_depart);
  return {t, end};
}

namespace {

ConvexProgram build_program(std::span<const SessionSpec> active, std::span<const double> x,
                            const StationConfig& config, SolveWindow window,
                            const ProgramWeights& weights, bool soc_aware) {
  if (active.empty()) throw std::invalid_argument("program has no active sessions");
  if (x.size() != active.size()) throw std::invalid_argument("program: state count mismatch");
  if (window.length() <= 0) throw std::invalid_argument("program: empty solve window");
  if (static_cast<std::size_t>(window.end) > config.capacity.size())
    throw std::invalid_argument("program: window exceeds capacity series");

  ConvexProgram prog;
  prog.weights = weights;
  prog.window = window;

  for (std::size_t slot = 0; slot < active.size(); ++slot) {
    const auto& s = active[slot];
    const int from = std::max(window.start, s.t_arrival);
    const int to = std::min(window.end, s.t_depart);
    if (to <= from) continue;
    VehicleBlock block{slot, prog.vars.size(), static_cast<std::size_t>(to - from), x[slot],
                       s.x_final, config.delta};
    for (int t = from; t < to; ++t) prog.vars.push_back({slot, t});
    prog.blocks.push_back(block);
  }
  if (prog.vars.empty()) throw std::invalid_argument("program: no session overlaps the window");
  prog.num_vars = prog.vars.size();

  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> rhs;
  auto add_row = [&](RowKind kind, double bound) {
    prog.row_kinds.push_back(kind);
    rhs.push_back(bound);
    return static_cast<int>(rhs.size() - 1);
  };

  // Capacity rows, one per step that carries at least one variable.
  for (int t = window.start; t < window.end; ++t) {
    std::vector<int> cols;
    for (std::size_t k = 0; k < prog.vars.size(); ++k)
      if (prog.vars[k].t == t) cols.push_back(static_cast<int>(k));
    if (cols.empty()) continue;
    const int row = add_row(RowKind::capacity, config.capacity_at(t));
    for (int k : cols) entries.emplace_back(row, k, 1.0);
  }

  for (const auto& block : prog.blocks) {
    const auto& s = active[block.slot];
    const double coupling = soc_aware ? s.alpha * config.delta : 0.0;
    const double bound = soc_aware ? peak_rate(s, block.x_start) : s.u_star;
    for (std::size_t p = 0; p < block.count; ++p) {
      const int row = add_row(RowKind::rate, bound);
      const auto k = static_cast<int>(block.first + p);
      if (coupling != 0.0)
        for (std::size_t q = 0; q < p; ++q)
          entries.emplace_back(row, static_cast<int>(block.first + q), coupling);
      entries.emplace_back(row, k, 1.0);
    }
  }

  for (const auto& block : prog.blocks) {
    const int row = add_row(RowKind::energy, std::max(block.x_target - block.x_start, 0.0));
    for (std::size_t p = 0; p < block.count; ++p)
      entries.emplace_back(row, static_cast<int>(block.first + p), block.delta);
  }

  prog.A.resize(static_cast<Eigen::Index>(rhs.size()), static_cast<Eigen::Index>(prog.num_vars));
  prog.A.setFromTriplets(entries.begin(), entries.end());
  prog.A.makeCompressed();
  prog.b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return prog;
}

}  // namespace

ConvexProgram build_mpc_program(std::span<const SessionSpec> active, std::span<const double> x,
                                const StationConfig& config, SolveWindow window,
                                const ProgramWeights& weights) {
  return build_program(active, x, config, window, weights, false);
}

ConvexProgram build_soc_mpc_program(std::span<const SessionSpec> active, std::span<const double> x,
                                    const StationConfig& config, SolveWindow window,
                                    const ProgramWeights& weights) {
  return build_program(active, x, config, window, weights, true);
}

Eigen::VectorXd block_end_energy(const Eigen::VectorXd& u, const ConvexProgram& prog) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(prog.blocks.size()));
  for (std::size_t g = 0; g < prog.blocks.size(); ++g) {
    const auto& blk = prog.blocks[g];
    const double sum = u.segment(static_cast<Eigen::Index>(blk.first),
                                 static_cast<Eigen::Index>(blk.count)).sum();
    out[static_cast<Eigen::Index>(g)] = blk.x_start + blk.delta * sum;
  }
  return out;
}

double objective_value(const Eigen::VectorXd& u, const ConvexProgram& prog) {
  if (static_cast<std::size_t>(u.size()) != prog.num_vars)
    throw std::invalid_argument("objective_value: dimension mismatch");
  const double eps = prog.weights.eps_log;
  double value = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) value += std::log(u[k] + eps);
  const Eigen::VectorXd x_end = block_end_energy(u, prog);
  for (std::size_t g = 0; g < prog.blocks.size(); ++g) {
    const double gap = x_end[static_cast<Eigen::Index>(g)] - prog.blocks[g].x_target;
    value -= prog.weights.lambda * gap * gap;
  }
  return value;
}

Eigen::VectorXd objective_gradient(const Eigen::VectorXd& u, const ConvexProgram& prog) {
  if (static_cast<std::size_t>(u.size()) != prog.num_vars)
    throw std::invalid_argument("objective_gradient: dimension mismatch");
  Eigen::VectorXd grad = (u.array() + prog.weights.eps_log).inverse().matrix();
  const Eigen::VectorXd x_end = block_end_energy(u, prog);
  for (std::size_t g = 0; g < prog.blocks.size(); ++g) {
    const auto& blk = prog.blocks[g];
    const double slope =
        2.0 * prog.weights.lambda * blk.delta * (x_end[static_cast<Eigen::Index>(g)] - blk.x_target);
    grad.segment(static_cast<Eigen::Index>(blk.first), static_cast<Eigen::Index>(blk.count))
        .array() -= slope;
  }
  return grad;
}

}  // namespace socev
