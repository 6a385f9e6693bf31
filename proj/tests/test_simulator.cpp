#include <doctest.h>

#include <cmath>
#include <random>

#include "socev/simulator.hpp"

using namespace socev;

namespace {

SessionSpec ev(std::size_t id, double u_star, double alpha, int arrive, int depart, double x0,
               double x1) {
  SessionSpec s;
  s.id = id;
  s.u_star = u_star;
  s.alpha = alpha;
  s.t_arrival = arrive;
  s.t_depart = depart;
  s.x_initial = x0;
  s.x_final = x1;
  return s;
}

StationConfig flat(double p, int horizon, double delta = 1.0) {
  return {std::vector<double>(static_cast<std::size_t>(horizon), p), delta, horizon};
}

std::vector<SessionSpec> random_fleet(std::mt19937_64& rng, std::size_t n, int horizon, double alpha) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SessionSpec> specs;
  for (std::size_t i = 0; i < n; ++i) {
    const int arrive = static_cast<int>(unit(rng) * (horizon - 2));
    const int depart = std::min(horizon, arrive + 2 + static_cast<int>(unit(rng) * 12));
    const double x0 = 5.0 + 15.0 * unit(rng);
    specs.push_back(ev(i, 6.6, alpha, arrive, depart, x0, x0 + 5.0 + 20.0 * unit(rng)));
  }
  return specs;
}

// Two vehicles at high charge sharing a tight feeder.
std::vector<SessionSpec> desk_instance(double alpha) {
  return {ev(0, 6.6, alpha, 0, 3, 20.0, 32.0), ev(1, 6.6, alpha, 0, 3, 30.0, 40.0)};
}

}  // namespace

TEST_CASE("empty session list gives an all-zero result") {
  for (PolicyKind p : all_policies()) {
    const auto r = run({}, flat(10.0, 4), p);
    CHECK(r.aggregate.delivered == 0.0);
    CHECK(r.aggregate.feasible_rate == 1.0);
    CHECK(r.aggregate.clipped == 0.0);
    CHECK(r.steps.size() == 4);
    for (const auto& s : r.steps) CHECK(s.applied == 0.0);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].kind == EventKind::horizon_end);
    CHECK(r.events[0].t == 4);
  }
}

TEST_CASE("a lone unconstrained vehicle gets exactly what it asked for") {
  const std::vector<SessionSpec> one{ev(7, 5.0, 0.0, 0, 6, 0.0, 5.0)};
  for (PolicyKind p : all_policies()) {
    CAPTURE(to_string(p));
    const auto r = run(one, flat(50.0, 6), p);
    CHECK(r.aggregate.delivered == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(r.aggregate.feasible_rate == 1.0);
    REQUIRE(r.vehicles.size() == 1);
    CHECK(r.vehicles[0].id == 7);
    CHECK(r.vehicles[0].target_met);
    if (p == PolicyKind::es || p == PolicyKind::edf) CHECK(r.vehicles[0].completion_step == 1);
  }
  // with a one-step stay every policy must finish at step 1
  const std::vector<SessionSpec> short_stay{ev(7, 5.0, 0.0, 0, 1, 0.0, 5.0)};
  for (PolicyKind p : all_policies()) {
    const auto r = run(short_stay, flat(50.0, 3), p);
    CHECK(r.vehicles[0].completion_step == 1);
  }
}

TEST_CASE("events are ordered and trigger re-solves") {
  const std::vector<SessionSpec> specs{ev(0, 6.6, 0.1, 0, 3, 0, 4), ev(1, 6.6, 0.1, 1, 5, 0, 30),
                                       ev(2, 6.6, 0.1, 3, 6, 0, 30)};
  const auto r = run(specs, flat(8.0, 6), PolicyKind::soc_mpc);
  for (std::size_t k = 1; k < r.events.size(); ++k) CHECK(r.events[k - 1].t <= r.events[k].t);
  auto rank = [](EventKind k) {
    switch (k) {
      case EventKind::departure: return 0;
      case EventKind::target_met: return 1;
      case EventKind::arrival: return 2;
      case EventKind::horizon_end: return 3;
    }
    return 4;
  };
  for (std::size_t k = 1; k < r.events.size(); ++k)
    if (r.events[k - 1].t == r.events[k].t) CHECK(rank(r.events[k - 1].kind) <= rank(r.events[k].kind));
  CHECK(r.events.back().kind == EventKind::horizon_end);

  int event_steps = 0;
  for (int t = 0; t < 6; ++t) {
    bool any = false;
    for (const auto& e : r.events) any = any || e.t == t;
    if (any && r.steps[static_cast<std::size_t>(t)].active > 0) ++event_steps;
  }
  CHECK(r.aggregate.solves == static_cast<std::size_t>(event_steps));
  CHECK(r.vehicles[0].target_met);
}

TEST_CASE("congested desk instance: SOC-aware planning delivers at least as much") {
  const auto specs = desk_instance(0.1);
  const auto cfg = flat(7.0, 3);
  const auto mpc = run(specs, cfg, PolicyKind::mpc);
  const auto soc = run(specs, cfg, PolicyKind::soc_mpc);
  CHECK(soc.aggregate.delivered >= mpc.aggregate.delivered - 1e-6);
  CHECK(mpc.aggregate.clipped > 0.0);
  CHECK(soc.aggregate.clipped <= 1e-6 * soc.aggregate.commanded);
}

TEST_CASE("simulation invariants on random fleets") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 12; ++trial) {
    const double alpha = (trial % 3) * 0.05;
    const int horizon = 24;
    const auto specs = random_fleet(rng, 8, horizon, alpha);
    const auto cfg = flat(15.0, horizon, 0.25);
    const auto policies = all_policies();
    const auto results = compare(specs, cfg, policies, {}, 2);
    REQUIRE(results.size() == 4);
    for (const auto& r : results) {
      CAPTURE(r.policy);
      CHECK(validate_schedule(r.schedule, specs, cfg).empty());
      double total = 0.0;
      for (std::size_t i = 0; i < specs.size(); ++i) {
        double sum = 0.0;
        for (double u : r.schedule.applied_row(i)) sum += u;
        total += sum;
        const double gained = r.vehicles[i].x_end - specs[i].x_initial;
        CHECK(std::abs(gained - cfg.delta * sum) <= 1e-9 * std::max(1.0, std::abs(gained)));
        CHECK(r.vehicles[i].delivered == doctest::Approx(gained).epsilon(1e-9));
      }
      CHECK(r.aggregate.delivered == doctest::Approx(cfg.delta * total).epsilon(1e-9));
      std::size_t met = 0;
      for (std::size_t i = 0; i < specs.size(); ++i)
        met += r.vehicles[i].x_end >= specs[i].x_final - kDoneTolerance ? 1 : 0;
      CHECK(r.aggregate.feasible_rate == doctest::Approx(static_cast<double>(met) / 8.0));
      CHECK(r.aggregate.solver_failures == 0);
    }
    const auto& mpc = results[2];
    const auto& soc = results[3];
    CHECK(soc.aggregate.clipped <= 1e-6 * std::max(soc.aggregate.commanded, 1.0));
    if (alpha == 0.0)
      for (std::size_t i = 0; i < specs.size(); ++i)
        for (std::size_t t = 0; t < static_cast<std::size_t>(horizon); ++t)
          CHECK(std::abs(mpc.schedule.applied(i, t) - soc.schedule.applied(i, t)) <= 1e-6);

    // worker count never changes the outcome
    CHECK(compare(specs, cfg, policies, {}, 1) == results);
  }
}

TEST_CASE("run rejects invalid input before simulating") {
  std::vector<SessionSpec> bad{ev(0, 6.6, 0.1, 0, 9, 0, 10)};
  CHECK_THROWS_AS(run(bad, flat(10.0, 4), PolicyKind::es), std::invalid_argument);
  StationConfig short_cap{{1.0, 1.0}, 1.0, 4};
  CHECK_THROWS_AS(run({}, short_cap, PolicyKind::es), std::invalid_argument);
}

TEST_CASE("parallel_for reports failures") {
  std::vector<int> hit(10, 0);
  parallel_for(10, 3, [&](std::size_t k) { hit[k] = 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(5, 2, [](std::size_t k) {
                    if (k == 3) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
