#include "socev/solver.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace socev {

void SolverOptions::validate() const {
  if (!(kkt_tol > 0.0)) throw std::invalid_argument("kkt_tol must be > 0");
  if (!(eps_log > 0.0)) throw std::invalid_argument("eps_log must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_limit: return "iteration-limit";
    case SolveStatus::infeasible_input: return "infeasible-input";
  }
  return "unknown";
}

double KktResiduals::max() const {
  return std::max({stationarity, primal, complementarity, dual_sign});
}

KktResiduals kkt_residuals(const ConvexProgram& prog, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& z, const Eigen::VectorXd& w) {
  KktResiduals r;
  const Eigen::VectorXd slack = prog.b - prog.A * u;
  const Eigen::VectorXd stat = -objective_gradient(u, prog) + prog.A.transpose() * z - w;
  r.stationarity = stat.lpNorm<Eigen::Infinity>();
  r.primal = std::max({0.0, (-slack).maxCoeff(), (-u).maxCoeff()});
  r.complementarity = std::max((z.array() * slack.array()).abs().maxCoeff(),
                               (w.array() * u.array()).abs().maxCoeff());
  r.dual_sign = std::max({0.0, (-z).maxCoeff(), (-w).maxCoeff()});
  return r;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

bool finite_input(const ConvexProgram& prog) {
  if (prog.A.cols() != static_cast<Index>(prog.num_vars) || prog.b.size() != prog.A.rows() ||
      prog.row_kinds.size() != static_cast<std::size_t>(prog.A.rows()))
    return false;
  if (!prog.b.allFinite()) return false;
  for (Index k = 0; k < prog.A.nonZeros(); ++k)
    if (!std::isfinite(prog.A.valuePtr()[k])) return false;
  if (!std::isfinite(prog.weights.lambda) || !std::isfinite(prog.weights.eps_log)) return false;
  for (const auto& blk : prog.blocks) {
    if (blk.first + blk.count > prog.num_vars) return false;
    if (!std::isfinite(blk.x_start) || !std::isfinite(blk.x_target) || !std::isfinite(blk.delta))
      return false;
  }
  return true;
}

// Terminal-penalty group restricted to free variables; `last` is the final chain element.
struct Group {
  std::vector<Index> members;
  double x_start = 0.0;
  double x_target = 0.0;
  double delta = 1.0;
};

// The reduced problem over free variables. Newton systems are solved in chain
// coordinates u = B y, where within each vehicle chain u_j = y_j - y_pred(j). The
// rolled-out peak-rate rows and the terminal sums become two-term expressions in y,
// which keeps the normal matrix banded.
class BarrierProblem {
 public:
  BarrierProblem(const ConvexProgram& prog, const std::vector<Index>& free_vars,
                 const std::vector<Index>& kept_rows)
      : eps_(prog.weights.eps_log), lambda_(prog.weights.lambda) {
    const auto nf = static_cast<Index>(free_vars.size());
    std::vector<Index> reduced(prog.num_vars, -1);
    for (Index j = 0; j < nf; ++j) reduced[static_cast<std::size_t>(free_vars[j])] = j;

    std::vector<Eigen::Triplet<double>> trip;
    for (Index r = 0; r < static_cast<Index>(kept_rows.size()); ++r) {
      const Index row = kept_rows[static_cast<std::size_t>(r)];
      for (decltype(prog.A)::InnerIterator it(prog.A, row); it; ++it) {
        const Index j = reduced[static_cast<std::size_t>(it.col())];
        if (j >= 0) trip.emplace_back(r, j, it.value());
      }
    }
    A_.resize(static_cast<Index>(kept_rows.size()), nf);
    A_.setFromTriplets(trip.begin(), trip.end());
    b_.resize(static_cast<Index>(kept_rows.size()));
    for (Index r = 0; r < b_.size(); ++r) b_[r] = prog.b[kept_rows[static_cast<std::size_t>(r)]];

    pred_.assign(static_cast<std::size_t>(nf), -1);
    succ_.assign(static_cast<std::size_t>(nf), -1);
    for (const auto& blk : prog.blocks) {
      Group g{{}, blk.x_start, blk.x_target, blk.delta};
      for (std::size_t p = 0; p < blk.count; ++p) {
        const Index j = reduced[blk.first + p];
        if (j < 0) continue;
        if (!g.members.empty()) {
          pred_[static_cast<std::size_t>(j)] = g.members.back();
          succ_[static_cast<std::size_t>(g.members.back())] = j;
        }
        g.members.push_back(j);
      }
      groups_.push_back(std::move(g));
    }

    std::vector<Eigen::Triplet<double>> btrip;
    for (Index j = 0; j < nf; ++j) {
      btrip.emplace_back(j, j, 1.0);
      if (pred_[static_cast<std::size_t>(j)] >= 0)
        btrip.emplace_back(j, pred_[static_cast<std::size_t>(j)], -1.0);
    }
    SpMat B(nf, nf);
    B.setFromTriplets(btrip.begin(), btrip.end());
    C_ = SpMat(A_ * B);
    C_.prune([](Index, Index, double v) { return v != 0.0; });
    Ct_ = C_.transpose();
  }

  Index size() const { return A_.cols(); }
  const SpMat& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }

  // Objective to minimize: -sum log(u + eps) + lambda * sum gap^2 over free variables.
  double objective(const Eigen::VectorXd& u) const {
    double f = -(u.array() + eps_).log().sum();
    for (const auto& g : groups_) {
      const double gap = gap_of(g, u);
      f += lambda_ * gap * gap;
    }
    return f;
  }

  double barrier(const Eigen::VectorXd& u, const Eigen::VectorXd& s, double mu) const {
    return objective(u) - mu * (s.array().log().sum() + u.array().log().sum());
  }

  // Gradient of the minimized objective.
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const {
    Eigen::VectorXd g = -(u.array() + eps_).inverse().matrix();
    for (const auto& grp : groups_) {
      const double slope = 2.0 * lambda_ * grp.delta * gap_of(grp, u);
      for (Index j : grp.members) g[j] += slope;
    }
    return g;
  }

  // Solves (hess f + A^T diag(row_weight) A + diag(bound_weight)) du = -g.
  bool newton_direction(const Eigen::VectorXd& u, const Eigen::VectorXd& bound_weight,
                        const Eigen::VectorXd& row_weight, const Eigen::VectorXd& g,
                        Eigen::VectorXd& du) {
    const Index n = size();
    const Eigen::VectorXd d1 = (u.array() + eps_).square().inverse().matrix() + bound_weight;
    const Eigen::VectorXd& d2 = row_weight;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(3 * n + static_cast<Index>(groups_.size())));
    for (Index j = 0; j < n; ++j) {
      const Index nx = succ_[static_cast<std::size_t>(j)];
      double diag = d1[j];
      if (nx >= 0) {
        diag += d1[nx];
        trip.emplace_back(j, nx, -d1[nx]);
        trip.emplace_back(nx, j, -d1[nx]);
      }
      trip.emplace_back(j, j, diag);
    }
    for (const auto& grp : groups_) {
      if (grp.members.empty()) continue;
      const Index last = grp.members.back();
      trip.emplace_back(last, last, 2.0 * lambda_ * grp.delta * grp.delta);
    }
    SpMat K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    K += SpMat(Ct_ * d2.asDiagonal() * C_);

    if (!analyzed_) {
      ldlt_.analyzePattern(K);
      analyzed_ = true;
    }
    ldlt_.factorize(K);
    if (ldlt_.info() != Eigen::Success) {
      ldlt_.compute(K);
      if (ldlt_.info() != Eigen::Success) return false;
    }

    // rhs = -B^T g ; du = B dy
    Eigen::VectorXd rhs(n);
    for (Index j = 0; j < n; ++j) {
      const Index nx = succ_[static_cast<std::size_t>(j)];
      rhs[j] = -(g[j] - (nx >= 0 ? g[nx] : 0.0));
    }
    const Eigen::VectorXd dy = ldlt_.solve(rhs);
    if (!dy.allFinite()) return false;
    du.resize(n);
    for (Index j = 0; j < n; ++j) {
      const Index pv = pred_[static_cast<std::size_t>(j)];
      du[j] = dy[j] - (pv >= 0 ? dy[pv] : 0.0);
    }
    return true;
  }

 private:
  double gap_of(const Group& g, const Eigen::VectorXd& u) const {
    double sum = 0.0;
    for (Index j : g.members) sum += u[j];
    return g.x_start + g.delta * sum - g.x_target;
  }

  double eps_;
  double lambda_;
  SpMat A_;
  Eigen::VectorXd b_;
  SpMat C_;
  SpMat Ct_;
  std::vector<Index> pred_;
  std::vector<Index> succ_;
  std::vector<Group> groups_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
};

// Largest step in (0, 1] with v + step * dv >= (1 - tau) * v.
double fraction_to_boundary(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double tau) {
  double step = 1.0;
  for (Index j = 0; j < v.size(); ++j)
    if (dv[j] < 0.0) step = std::min(step, -tau * v[j] / dv[j]);
  return step;
}

}  // namespace

Solution solve(const ConvexProgram& prog, const SolverOptions& opts) {
  opts.validate();
  const auto n = static_cast<Index>(prog.num_vars);
  const Index m = prog.A.rows();

  Solution sol;
  sol.u = Eigen::VectorXd::Zero(n);
  sol.row_duals = Eigen::VectorXd::Zero(m);
  sol.bound_duals = Eigen::VectorXd::Zero(n);
  sol.kkt_residual = std::numeric_limits<double>::infinity();
  sol.status = SolveStatus::infeasible_input;
  sol.objective_value = std::numeric_limits<double>::quiet_NaN();

  if (!finite_input(prog) || (m > 0 && prog.b.minCoeff() < 0.0) || !(prog.weights.eps_log > 0.0))
    return sol;

  // Rows with nonnegative coefficients and zero right-hand side pin their variables to 0.
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  std::vector<char> fixing_row(static_cast<std::size_t>(m), 0);
  for (Index r = 0; r < m; ++r) {
    bool nonneg = true;
    bool any_pos = false;
    for (decltype(prog.A)::InnerIterator it(prog.A, r); it; ++it) {
      nonneg = nonneg && it.value() >= 0.0;
      any_pos = any_pos || it.value() > 0.0;
    }
    if (nonneg && any_pos && prog.b[r] <= 0.0) {
      fixing_row[static_cast<std::size_t>(r)] = 1;
      for (decltype(prog.A)::InnerIterator it(prog.A, r); it; ++it)
        if (it.value() > 0.0) fixed[static_cast<std::size_t>(it.col())] = 1;
    }
  }
  std::vector<Index> free_vars;
  for (Index k = 0; k < n; ++k)
    if (!fixed[static_cast<std::size_t>(k)]) free_vars.push_back(k);
  std::vector<Index> kept_rows;
  for (Index r = 0; r < m; ++r) {
    bool touches_free = false;
    for (decltype(prog.A)::InnerIterator it(prog.A, r); it; ++it)
      touches_free = touches_free || (it.value() != 0.0 && !fixed[static_cast<std::size_t>(it.col())]);
    if (touches_free) kept_rows.push_back(r);
  }

  BarrierProblem bp(prog, free_vars, kept_rows);
  const Index nf = bp.size();

  // Strictly interior start: each variable takes half of its tightest row share.
  Eigen::VectorXd u = Eigen::VectorXd::Ones(nf);
  {
    Eigen::VectorXd pos_sum = Eigen::VectorXd::Zero(bp.A().rows());
    for (Index c = 0; c < nf; ++c)
      for (SpMat::InnerIterator it(bp.A(), c); it; ++it)
        if (it.value() > 0.0) pos_sum[it.row()] += it.value();
    for (Index c = 0; c < nf; ++c)
      for (SpMat::InnerIterator it(bp.A(), c); it; ++it)
        if (it.value() > 0.0) u[c] = std::min(u[c], 0.5 * bp.b()[it.row()] / pos_sum[it.row()]);
  }
  Eigen::VectorXd s = bp.b() - bp.A() * u;
  if (nf > 0 && (u.minCoeff() <= 0.0 || (s.size() > 0 && s.minCoeff() <= 0.0))) return sol;

  // Primal-dual iterations on the barrier subproblems; mu follows a monotone schedule
  // and drops once the subproblem error falls below 10 * mu. The floor sits well below
  // the tolerance so that tight rows end up with slack far under kkt_tol.
  const double mu_min = 1e-4 * opts.kkt_tol;
  const double target = 0.5 * opts.kkt_tol;
  double mu = std::max(0.1, mu_min);
  Eigen::VectorXd z = mu * s.cwiseInverse();
  Eigen::VectorXd w = mu * u.cwiseInverse();
  int iters = 0;

  auto errors = [&](double shift, double& stat, double& comp) {
    stat = (bp.gradient(u) + bp.A().transpose() * z - w).lpNorm<Eigen::Infinity>();
    comp = 0.0;
    if (s.size() > 0) comp = (z.array() * s.array() - shift).abs().maxCoeff();
    if (u.size() > 0) comp = std::max(comp, (w.array() * u.array() - shift).abs().maxCoeff());
  };

  Eigen::VectorXd du;
  while (nf > 0) {
    double stat = 0.0, comp = 0.0;
    errors(0.0, stat, comp);
    if (std::max(stat, comp) <= target && mu <= mu_min) break;
    errors(mu, stat, comp);
    while (mu > mu_min && std::max(stat, comp) <= 10.0 * mu) {
      mu = std::max(mu_min, std::min(0.2 * mu, std::pow(mu, 1.5)));
      errors(mu, stat, comp);
    }
    if (iters >= opts.max_iters) break;

    const Eigen::VectorXd grad_f = bp.gradient(u);
    const Eigen::VectorXd g = grad_f + mu * (bp.A().transpose() * s.cwiseInverse()) - mu * u.cwiseInverse();
    const Eigen::VectorXd row_weight = z.cwiseQuotient(s);
    const Eigen::VectorXd bound_weight = w.cwiseQuotient(u);
    if (!bp.newton_direction(u, bound_weight, row_weight, g, du)) break;
    const Eigen::VectorXd Adu = bp.A() * du;
    const Eigen::VectorXd ds = -Adu;
    const Eigen::VectorXd dz = (mu * s.cwiseInverse() - z + z.cwiseProduct(Adu).cwiseQuotient(s));
    const Eigen::VectorXd dw = (mu * u.cwiseInverse() - w - w.cwiseProduct(du).cwiseQuotient(u));

    const double tau = std::max(0.99, 1.0 - mu);
    double step = fraction_to_boundary(u, du, tau);
    step = std::min(step, fraction_to_boundary(s, ds, tau));
    const double slope = g.dot(du);
    const double phi0 = bp.barrier(u, s, mu);
    Eigen::VectorXd u_try;
    Eigen::VectorXd s_try;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      u_try = u + step * du;
      s_try = bp.b() - bp.A() * u_try;
      const bool interior = u_try.minCoeff() > 0.0 && (s_try.size() == 0 || s_try.minCoeff() > 0.0);
      // A vanishing directional derivative means the barrier value is flat to rounding;
      // the Newton step is then taken as is.
      if (interior && (-slope <= 1e-12 * (1.0 + std::abs(phi0)) ||
                       bp.barrier(u_try, s_try, mu) <= phi0 + 1e-4 * step * slope)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++iters;
    if (!accepted) break;
    const double dual_step =
        std::min(fraction_to_boundary(z, dz, tau), fraction_to_boundary(w, dw, tau));
    u = std::move(u_try);
    s = std::move(s_try);
    z += dual_step * dz;
    w += dual_step * dw;
    // Keep the dual estimates within a bounded factor of their primal counterparts.
    constexpr double kappa = 1e10;
    for (Index r = 0; r < z.size(); ++r) z[r] = std::clamp(z[r], mu / (kappa * s[r]), kappa * mu / s[r]);
    for (Index j = 0; j < w.size(); ++j) w[j] = std::clamp(w[j], mu / (kappa * u[j]), kappa * mu / u[j]);
  }

  // Assemble the full-space point and multipliers.
  for (Index j = 0; j < nf; ++j) sol.u[free_vars[static_cast<std::size_t>(j)]] = u[j];
  for (Index r = 0; r < static_cast<Index>(kept_rows.size()); ++r)
    sol.row_duals[kept_rows[static_cast<std::size_t>(r)]] = z[r];
  for (Index j = 0; j < nf; ++j) sol.bound_duals[free_vars[static_cast<std::size_t>(j)]] = w[j];

  // Pinned variables: choose multipliers of their pinning rows so that the bound
  // multipliers w = grad(-f) + A^T z are nonnegative; those rows have zero slack.
  if (static_cast<Index>(free_vars.size()) < n) {
    const Eigen::VectorXd neg_grad = -objective_gradient(sol.u, prog);
    const SpMat by_column(prog.A);
    for (Index r = 0; r < m; ++r) {
      if (!fixing_row[static_cast<std::size_t>(r)]) continue;
      double need = 0.0;
      for (decltype(prog.A)::InnerIterator it(prog.A, r); it; ++it) {
        if (it.value() <= 0.0) continue;
        double w = neg_grad[it.col()];
        for (SpMat::InnerIterator jt(by_column, it.col()); jt; ++jt) w += jt.value() * sol.row_duals[jt.row()];
        if (w < 0.0) need = std::max(need, -w / it.value());
      }
      sol.row_duals[r] += need;
    }
    const Eigen::VectorXd w_all = neg_grad + prog.A.transpose() * sol.row_duals;
    for (Index k = 0; k < n; ++k)
      if (fixed[static_cast<std::size_t>(k)]) sol.bound_duals[k] = std::max(w_all[k], 0.0);
  }

  sol.iterations = iters;
  sol.objective_value = objective_value(sol.u, prog);
  sol.kkt_residual = kkt_residuals(prog, sol.u, sol.row_duals, sol.bound_duals).max();
  sol.status = sol.kkt_residual <= opts.kkt_tol ? SolveStatus::converged : SolveStatus::iteration_limit;
  return sol;
}

}  // namespace socev
