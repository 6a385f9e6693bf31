#pragma once

// Exhaustive lattice search for tiny charging programs (<= 2 vehicles x 3 steps).
// Test-only: computes constraints and the objective straight from the physical
// instance, sharing no code with the program builder or solver.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

struct TinyVehicle {
  double u_star = 1.0;
  double alpha = 0.0;
  double x_start = 0.0;
  double x_final = 1.0;
  int from = 0;  // plugged-in steps [from, to) relative to the window start
  int to = 3;
};

struct TinyInstance {
  std::vector<TinyVehicle> vehicles;  // 1 or 2
  std::vector<double> capacity;       // one per window step, at most 3
  double delta = 1.0;
  double lambda = 10.0;
  double eps = 1e-3;
  bool soc_aware = true;
};

struct OracleResult {
  double objective = -std::numeric_limits<double>::infinity();
  std::array<std::array<double, 3>, 2> rates{};  // rates[v][t]
};

namespace detail {

struct Lattice {
  std::array<int, 3> size{1, 1, 1};
  std::size_t total() const {
    return static_cast<std::size_t>(size[0]) * static_cast<std::size_t>(size[1]) *
           static_cast<std::size_t>(size[2]);
  }
  std::size_t flat(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * static_cast<std::size_t>(size[1]) +
            static_cast<std::size_t>(b)) * static_cast<std::size_t>(size[2]) +
           static_cast<std::size_t>(c);
  }
};

inline bool plugged(const TinyVehicle& v, int t) { return v.from <= t && t < v.to; }

// Per-vehicle objective over a lattice point, or -inf if the vehicle's own
// constraints fail.
inline double vehicle_value(const TinyInstance& inst, const TinyVehicle& v,
                            const std::array<double, 3>& r) {
  const double tol = 1e-12;
  double energy = 0.0;
  double value = 0.0;
  double drawn_before = 0.0;
  const int steps = static_cast<int>(inst.capacity.size());
  for (int t = 0; t < steps; ++t) {
    if (!plugged(v, t)) continue;
    if (r[static_cast<std::size_t>(t)] > v.u_star + tol) return -std::numeric_limits<double>::infinity();
    if (inst.soc_aware) {
      // stored energy before step t is x_start + delta * drawn_before
      const double limit = std::max(v.u_star - v.alpha * (v.x_start + inst.delta * drawn_before), 0.0);
      if (r[static_cast<std::size_t>(t)] > limit + tol) return -std::numeric_limits<double>::infinity();
    }
    drawn_before += r[static_cast<std::size_t>(t)];
    energy += inst.delta * r[static_cast<std::size_t>(t)];
    value += std::log(r[static_cast<std::size_t>(t)] + inst.eps);
  }
  if (energy > std::max(v.x_final - v.x_start, 0.0) + tol) return -std::numeric_limits<double>::infinity();
  const double gap = v.x_start + energy - v.x_final;
  return value - inst.lambda * gap * gap;
}

inline Lattice lattice_for(const TinyInstance& inst, const TinyVehicle& v, double h) {
  Lattice lat;
  for (int t = 0; t < static_cast<int>(inst.capacity.size()); ++t)
    if (plugged(v, t))
      lat.size[static_cast<std::size_t>(t)] =
          static_cast<int>(std::floor(std::min(v.u_star, inst.capacity[static_cast<std::size_t>(t)]) / h + 1e-9)) + 1;
  return lat;
}

}  // namespace detail

/// Best lattice point (spacing h kW) of the instance. Always a feasible point, so its
/// objective never exceeds the continuous optimum.
inline OracleResult grid_oracle(const TinyInstance& inst, double h = 0.01) {
  using namespace detail;
  if (inst.vehicles.empty() || inst.vehicles.size() > 2 || inst.capacity.size() > 3)
    throw std::invalid_argument("grid_oracle handles at most 2 vehicles x 3 steps");

  const TinyVehicle& v1 = inst.vehicles[0];
  const Lattice lat1 = lattice_for(inst, v1, h);
  OracleResult best;

  if (inst.vehicles.size() == 1) {
    for (int a = 0; a < lat1.size[0]; ++a)
      for (int b = 0; b < lat1.size[1]; ++b)
        for (int c = 0; c < lat1.size[2]; ++c) {
          const std::array<double, 3> r{a * h, b * h, c * h};
          const double val = vehicle_value(inst, v1, r);
          if (val > best.objective) {
            best.objective = val;
            best.rates[0] = r;
          }
        }
    return best;
  }

  // Vehicle 2: value table, then prefix maximum so that G[c] = max over r <= c.
  const TinyVehicle& v2 = inst.vehicles[1];
  const Lattice lat2 = lattice_for(inst, v2, h);
  std::vector<double> g(lat2.total());
  std::vector<std::uint32_t> arg(lat2.total());
  for (int a = 0; a < lat2.size[0]; ++a)
    for (int b = 0; b < lat2.size[1]; ++b)
      for (int c = 0; c < lat2.size[2]; ++c) {
        const std::size_t k = lat2.flat(a, b, c);
        g[k] = vehicle_value(inst, v2, {a * h, b * h, c * h});
        arg[k] = static_cast<std::uint32_t>(k);
      }
  for (int a = 0; a < lat2.size[0]; ++a)
    for (int b = 0; b < lat2.size[1]; ++b)
      for (int c = 0; c < lat2.size[2]; ++c) {
        const std::size_t k = lat2.flat(a, b, c);
        auto take = [&](std::size_t other) {
          if (g[other] > g[k]) {
            g[k] = g[other];
            arg[k] = arg[other];
          }
        };
        if (a > 0) take(lat2.flat(a - 1, b, c));
        if (b > 0) take(lat2.flat(a, b - 1, c));
        if (c > 0) take(lat2.flat(a, b, c - 1));
      }

  auto room = [&](int t, double used) {
    const auto ts = static_cast<std::size_t>(t);
    if (t >= static_cast<int>(inst.capacity.size())) return 0;
    const int idx = static_cast<int>(std::floor((inst.capacity[ts] - used) / h + 1e-9));
    return std::min(idx, lat2.size[ts] - 1);
  };

  for (int a = 0; a < lat1.size[0]; ++a)
    for (int b = 0; b < lat1.size[1]; ++b)
      for (int c = 0; c < lat1.size[2]; ++c) {
        const std::array<double, 3> r{a * h, b * h, c * h};
        const double val = vehicle_value(inst, v1, r);
        if (val == -std::numeric_limits<double>::infinity()) continue;
        const int ra = room(0, r[0]), rb = room(1, r[1]), rc = room(2, r[2]);
        if (ra < 0 || rb < 0 || rc < 0) continue;
        const std::size_t k = lat2.flat(ra, rb, rc);
        const double total = val + g[k];
        if (total > best.objective) {
          best.objective = total;
          best.rates[0] = r;
          const std::size_t w = arg[k];
          const std::size_t s12 = static_cast<std::size_t>(lat2.size[1]) * static_cast<std::size_t>(lat2.size[2]);
          const auto i0 = static_cast<int>(w / s12);
          const auto i1 = static_cast<int>((w % s12) / static_cast<std::size_t>(lat2.size[2]));
          const auto i2 = static_cast<int>(w % static_cast<std::size_t>(lat2.size[2]));
          best.rates[1] = {i0 * h, i1 * h, i2 * h};
        }
      }
  return best;
}

}  // namespace oracle
