#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "socev/csv.hpp"
#include "socev/generator.hpp"
#include "socev/ingest.hpp"
#include "socev/policies.hpp"
#include "socev/result_io.hpp"
#include "socev/scenario.hpp"
#include "socev/simulator.hpp"

namespace socev::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<PolicyKind> parse_policies(const std::vector<std::string>& names) {
  if (names.empty()) return all_policies();
  std::vector<PolicyKind> out;
  for (const auto& n : names) {
    const auto k = parse_policy(n);
    if (!k) throw UsageError("unknown policy '" + n + "' (expected es, edf, mpc, soc_mpc)");
    if (std::find(out.begin(), out.end(), *k) == out.end()) out.push_back(*k);
  }
  return out;
}

// Generator knobs shared by generate and sweep. Unset flags leave the setup alone.
struct GeneratorFlags {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> sessions;
  std::optional<double> rate;
  std::optional<double> peak_step;
  std::optional<double> peak_width;
  std::optional<double> expected;
  std::optional<double> alpha;
  std::optional<double> u_star;
  std::optional<double> congestion;
  std::optional<double> delta;
  std::optional<int> horizon;
  std::vector<int> stay;
  std::vector<double> x_initial;
  std::vector<double> requested;

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "Built-in preset")->check(CLI::IsMember(preset_names()));
    app->add_option("--config", config, "Generator config file (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--sessions", sessions, "Draw exactly this many sessions");
    app->add_option("--rate", rate, "Constant arrival rate (vehicles/step)");
    app->add_option("--peak-step", peak_step, "Step of the arrival peak");
    app->add_option("--peak-width", peak_width, "Spread of the arrival peak (steps)");
    app->add_option("--expected", expected, "Expected arrivals over the horizon");
    app->add_option("--alpha", alpha, "Peak-rate decay (kW/kWh)");
    app->add_option("--u-star", u_star, "Nominal peak rate (kW)");
    app->add_option("--congestion", congestion, "Capacity as a fraction of peak nominal demand");
    app->add_option("--delta", delta, "Step length (hours)");
    app->add_option("--horizon", horizon, "Number of steps");
    app->add_option("--stay", stay, "Stay bounds in steps: LO HI")->expected(2);
    app->add_option("--x-initial", x_initial, "Initial energy bounds (kWh): LO HI")->expected(2);
    app->add_option("--requested", requested, "Requested energy bounds (kWh): LO HI")->expected(2);
  }

  SyntheticSetup resolve() const {
    json file;
    if (!config.empty()) {
      try {
        file = json::parse(read_text(config));
      } catch (const json::exception& e) {
        throw UsageError(config + ": " + e.what());
      }
    }
    std::string base = preset;
    if (base.empty() && file.contains("preset")) base = file.at("preset").get<std::string>();
    if (base.empty()) base = "synthetic-morning";
    SyntheticSetup s;
    try {
      s = socev::preset(base);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    try {
      if (file.contains("generator")) apply_generator(file.at("generator"), s);
      if (file.contains("station")) {
        const json& st = file.at("station");
        if (st.contains("delta")) s.delta = st.at("delta").get<double>();
        if (st.contains("horizon")) s.horizon = st.at("horizon").get<int>();
        if (st.contains("congestion_ratio")) s.congestion_ratio = st.at("congestion_ratio").get<double>();
      }
    } catch (const json::exception& e) {
      throw UsageError(config + ": " + e.what());
    }

    if (seed) s.params.seed = *seed;
    if (sessions) s.params.session_count = *sessions;
    if (rate) s.intensity.constant_rate = *rate;
    if (peak_step) s.intensity.peak_step = *peak_step;
    if (peak_width) s.intensity.width = *peak_width;
    if (expected) s.intensity.expected_total = *expected;
    if (alpha) s.params.alpha = *alpha;
    if (u_star) s.params.u_star = *u_star;
    if (congestion) s.congestion_ratio = *congestion;
    if (delta) s.delta = *delta;
    if (horizon) s.horizon = *horizon;
    if (!stay.empty()) s.params.stay = {stay[0], stay[1]};
    if (!x_initial.empty()) s.params.x_initial = {x_initial[0], x_initial[1]};
    if (!requested.empty()) s.params.requested = {requested[0], requested[1]};
    return s;
  }

  static void apply_generator(const json& g, SyntheticSetup& s) {
    if (g.contains("seed")) s.params.seed = g.at("seed").get<std::uint64_t>();
    if (g.contains("sessions")) s.params.session_count = g.at("sessions").get<std::size_t>();
    if (g.contains("rate")) s.intensity.constant_rate = g.at("rate").get<double>();
    if (g.contains("intensity")) {
      const json& in = g.at("intensity");
      if (in.contains("peak_step")) s.intensity.peak_step = in.at("peak_step").get<double>();
      if (in.contains("width")) s.intensity.width = in.at("width").get<double>();
      if (in.contains("expected_total")) s.intensity.expected_total = in.at("expected_total").get<double>();
    }
    auto pair = [&](const char* key, auto& range) {
      if (!g.contains(key)) return;
      const auto v = g.at(key).get<std::vector<double>>();
      if (v.size() != 2) throw UsageError(std::string("'") + key + "' needs two bounds");
      using T = decltype(range.lo);
      range = {static_cast<T>(v[0]), static_cast<T>(v[1])};
    };
    pair("stay", s.params.stay);
    pair("x_initial", s.params.x_initial);
    pair("requested", s.params.requested);
    if (g.contains("u_star")) s.params.u_star = g.at("u_star").get<double>();
    if (g.contains("alpha")) s.params.alpha = g.at("alpha").get<double>();
  }
};

struct SolverFlags {
  std::optional<double> kkt_tol;
  std::optional<int> max_iters;
  std::optional<double> lambda;
  std::optional<double> eps_log;
  std::string baseline_limits = "nominal";
  unsigned workers = 1;

  void attach(CLI::App* app) {
    app->add_option("--kkt-tol", kkt_tol, "Solver KKT tolerance");
    app->add_option("--max-iters", max_iters, "Solver iteration cap");
    app->add_option("--lambda", lambda, "Terminal penalty weight");
    app->add_option("--eps-log", eps_log, "Utility shift (kW)");
    app->add_option("--baseline-limits", baseline_limits, "Limits seen by ES/EDF")
        ->check(CLI::IsMember({"nominal", "soc_aware"}));
    app->add_option("-j,--workers", workers, "Parallel runs")->check(CLI::Range(1u, 256u));
  }

  RunOptions resolve() const {
    RunOptions o;
    if (kkt_tol) o.solver.kkt_tol = *kkt_tol;
    if (max_iters) o.solver.max_iters = *max_iters;
    if (lambda) o.solver.lambda = *lambda;
    if (eps_log) o.solver.eps_log = *eps_log;
    o.baseline_limits = baseline_limits == "soc_aware" ? BaselineLimits::soc_aware : BaselineLimits::nominal;
    try {
      o.solver.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return o;
  }
};

ScenarioFile build_scenario(const SyntheticSetup& setup) {
  try {
    return generate_synthetic(setup);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Runs every policy, keeping going when one of them throws.
struct PolicyOutcome {
  std::optional<ScenarioResult> result;
  std::string error;
};

std::vector<PolicyOutcome> run_policies(const ScenarioFile& sc, std::span<const PolicyKind> policies,
                                        const RunOptions& opts, unsigned workers) {
  std::vector<PolicyOutcome> out(policies.size());
  parallel_for(policies.size(), workers, [&](std::size_t k) {
    try {
      out[k].result = run(sc.sessions, sc.config, policies[k], opts);
    } catch (const std::exception& e) {
      out[k].error = e.what();
    }
  });
  return out;
}

std::string aggregate_table(std::span<const ScenarioResult> results) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %14s %13s %12s %9s\n", "policy", "delivered_kwh", "feasible_rate",
                "clipped_kwh", "failures");
  os << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-8s %14s %13s %12s %9zu\n", r.policy.c_str(),
                  fixed(r.aggregate.delivered).c_str(), fixed(r.aggregate.feasible_rate).c_str(),
                  fixed(r.aggregate.clipped).c_str(), r.aggregate.solver_failures);
    os << line;
  }
  return os.str();
}

int cmd_generate(const GeneratorFlags& flags, const std::string& output, std::ostream& out, std::ostream& err) {
  const auto setup = flags.resolve();
  const auto sc = build_scenario(setup);
  save_scenario(sc, output);
  if (sc.sessions.empty()) err << "warning: generated 0 sessions\n";
  const double peak = peak_nominal_demand(sc.sessions, sc.config.horizon);
  out << "wrote " << sc.sessions.size() << " sessions to " << output << "\n"
      << "peak nominal demand " << fixed(peak) << " kW, capacity " << fixed(sc.config.capacity.empty() ? 0.0 : sc.config.capacity[0])
      << " kW (congestion ratio " << fixed(setup.congestion_ratio, 2) << ")\n";
  return kExitOk;
}

int cmd_run(const std::string& scenario_path, const std::vector<std::string>& policy_names, const SolverFlags& sf,
            const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto policies = parse_policies(policy_names);
  const auto opts = sf.resolve();
  const auto sc = load_scenario(scenario_path);
  const auto outcomes = run_policies(sc, policies, opts, sf.workers);

  std::vector<ScenarioResult> done;
  int code = kExitOk;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    if (outcomes[k].result) {
      done.push_back(*outcomes[k].result);
      if (done.back().aggregate.solver_failures > 0)
        err << "warning: " << done.back().policy << ": " << done.back().aggregate.solver_failures
            << " solves stopped before reaching the KKT tolerance\n";
    } else {
      err << "error: " << to_string(policies[k]) << ": " << outcomes[k].error << "\n";
      code = kExitFailure;
    }
  }
  write_comparison(done, out_dir);
  out << aggregate_table(done);
  return code;
}

struct SweepCell {
  std::uint64_t seed;
  double alpha;
  double ratio;
};

int cmd_sweep(const GeneratorFlags& gf, const SolverFlags& sf, const std::vector<double>& alphas,
              std::vector<double> ratios, std::size_t seeds, const std::vector<std::string>& policy_names,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto policies = parse_policies(policy_names);
  const auto opts = sf.resolve();
  const auto base = gf.resolve();
  for (double a : alphas)
    if (!(a >= 0.0)) throw UsageError("alpha values must be >= 0");
  if (ratios.empty()) ratios.push_back(base.congestion_ratio);
  for (double r : ratios)
    if (!(r > 0.0)) throw UsageError("congestion ratios must be > 0");
  if (seeds == 0) throw UsageError("--seeds must be >= 1");

  std::vector<SweepCell> cells;
  for (std::size_t s = 0; s < seeds; ++s)
    for (double a : alphas)
      for (double r : ratios) cells.push_back({base.params.seed + s, a, r});

  std::vector<ScenarioFile> scenarios;
  for (const auto& c : cells) {
    auto setup = base;
    setup.params.seed = c.seed;
    setup.params.alpha = c.alpha;
    setup.congestion_ratio = c.ratio;
    scenarios.push_back(build_scenario(setup));
  }

  const std::size_t np = policies.size();
  std::vector<PolicyOutcome> outcomes(cells.size() * np);
  parallel_for(outcomes.size(), sf.workers, [&](std::size_t k) {
    const auto& sc = scenarios[k / np];
    try {
      outcomes[k].result = run(sc.sessions, sc.config, policies[k % np], opts);
    } catch (const std::exception& e) {
      outcomes[k].error = e.what();
    }
  });

  int code = kExitOk;
  std::ostringstream sweep;
  write_csv_row(sweep, {"seed", "alpha", "congestion_ratio", "policy", "sessions", "delivered_kwh", "feasible_rate",
                        "clipped_kwh", "commanded_kwh", "mean_final_state_kwh", "solver_failures"});
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& c = cells[k / np];
    if (!outcomes[k].result) {
      err << "error: seed " << c.seed << " alpha " << format_number(c.alpha) << " "
          << to_string(policies[k % np]) << ": " << outcomes[k].error << "\n";
      code = kExitFailure;
      continue;
    }
    const auto& r = *outcomes[k].result;
    write_csv_row(sweep, {std::to_string(c.seed), format_number(c.alpha), format_number(c.ratio), r.policy,
                          std::to_string(scenarios[k / np].sessions.size()), format_number(r.aggregate.delivered),
                          format_number(r.aggregate.feasible_rate), format_number(r.aggregate.clipped),
                          format_number(r.aggregate.commanded), format_number(r.mean_final_state()),
                          std::to_string(r.aggregate.solver_failures)});
  }
  write_text(fs::path(out_dir) / "sweep.csv", sweep.str());

  // Gain of SOC_MPC over MPC per (alpha, ratio), across seeds.
  const auto mpc_at = std::find(policies.begin(), policies.end(), PolicyKind::mpc);
  const auto soc_at = std::find(policies.begin(), policies.end(), PolicyKind::soc_mpc);
  if (mpc_at != policies.end() && soc_at != policies.end()) {
    const auto im = static_cast<std::size_t>(mpc_at - policies.begin());
    const auto is = static_cast<std::size_t>(soc_at - policies.begin());
    std::ostringstream gains;
    write_csv_row(gains, {"alpha", "congestion_ratio", "seeds", "mean_gain_pct", "std_gain_pct"});
    out << "alpha  ratio  seeds  mean_gain_pct  std_gain_pct\n";
    for (double a : alphas)
      for (double r : ratios) {
        std::vector<double> g;
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
          if (cells[ci].alpha != a || cells[ci].ratio != r) continue;
          const auto& m = outcomes[ci * np + im].result;
          const auto& s = outcomes[ci * np + is].result;
          if (!m || !s) continue;
          const double dm = m->aggregate.delivered;
          g.push_back(dm > 0.0 ? 100.0 * (s->aggregate.delivered - dm) / dm : 0.0);
        }
        double mean = 0.0, var = 0.0;
        for (double v : g) mean += v;
        if (!g.empty()) mean /= static_cast<double>(g.size());
        for (double v : g) var += (v - mean) * (v - mean);
        const double sd = g.size() > 1 ? std::sqrt(var / static_cast<double>(g.size() - 1)) : 0.0;
        write_csv_row(gains, {format_number(a), format_number(r), std::to_string(g.size()), format_number(mean),
                              format_number(sd)});
        char line[128];
        std::snprintf(line, sizeof line, "%-6s %-6s %5zu  %13s  %12s\n", format_number(a).c_str(),
                      format_number(r).c_str(), g.size(), fixed(mean, 4).c_str(), fixed(sd, 4).c_str());
        out << line;
      }
    write_text(fs::path(out_dir) / "gains.csv", gains.str());
  }
  out << "wrote " << outcomes.size() << " rows to " << (fs::path(out_dir) / "sweep.csv").string() << "\n";
  return code;
}

int cmd_validate(const std::string& scenario_path, const std::string& result_dir,
                 const std::vector<std::string>& policy_names, std::ostream& out, std::ostream& err) {
  const auto sc = load_scenario(scenario_path);
  std::vector<PolicyKind> policies;
  if (policy_names.empty()) {
    for (PolicyKind k : all_policies())
      if (fs::exists(result_paths(result_dir, to_string(k)).result_json)) policies.push_back(k);
    if (policies.empty()) throw UsageError("no result files found in " + result_dir);
  } else {
    policies = parse_policies(policy_names);
  }

  int code = kExitOk;
  for (PolicyKind k : policies) {
    const auto r = read_result(result_dir, to_string(k));
    std::vector<Violation> v;
    try {
      v = validate_schedule(r.schedule, sc.sessions, sc.config);
    } catch (const std::invalid_argument& e) {
      err << to_string(k) << ": " << e.what() << "\n";
      code = kExitFailure;
      continue;
    }
    out << to_string(k) << ": " << (v.empty() ? "ok" : std::to_string(v.size()) + " violations") << "\n";
    for (std::size_t n = 0; n < std::min<std::size_t>(v.size(), 10); ++n) {
      out << "  " << to_string(v[n].kind) << " t=" << v[n].t;
      if (v[n].vehicle) out << " vehicle=" << *v[n].vehicle;
      out << " by " << format_number(v[n].magnitude) << "\n";
    }
    if (!v.empty()) code = kExitFailure;
  }
  return code;
}

int cmd_ingest(const std::string& input, const std::string& mapping_path, const std::string& output, double delta,
               int horizon, std::optional<double> capacity, double congestion, std::ostream& out, std::ostream& err) {
  const auto mapping = load_mapping(mapping_path);
  StationConfig grid{std::vector<double>(static_cast<std::size_t>(std::max(horizon, 1)), 0.0), delta, horizon};
  try {
    validate_config(grid);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  auto res = ingest_sessions(input, mapping, grid);
  for (const auto& note : res.notes) err << "dropped " << note << "\n";
  auto& sc = res.scenario;
  if (capacity) {
    if (!(*capacity >= 0.0)) throw UsageError("--capacity must be >= 0");
    sc.config.capacity.assign(static_cast<std::size_t>(horizon), *capacity);
  } else {
    sc.config.capacity = congested_capacity(sc.sessions, horizon, congestion);
  }
  save_scenario(sc, output);
  out << "read " << res.rows << " rows, kept " << sc.sessions.size() << ", dropped " << res.dropped << "\n"
      << "wrote " << output << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SOC-aware EV charging scheduler", "socev"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a synthetic scenario");
  GeneratorFlags gen_flags;
  gen_flags.attach(gen);
  std::string gen_out;
  gen->add_option("-o,--output", gen_out, "Scenario file to write")->required();

  auto* run_cmd = app.add_subcommand("run", "Simulate policies on a scenario");
  std::string run_scenario, run_out = "results";
  std::vector<std::string> run_policies_flag;
  SolverFlags run_solver;
  run_cmd->add_option("-s,--scenario", run_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-p,--policies", run_policies_flag, "Comma-separated policies (default: all)")->delimiter(',');
  run_cmd->add_option("-o,--output", run_out, "Output directory");
  run_solver.attach(run_cmd);

  auto* sweep = app.add_subcommand("sweep", "Grid over alpha and congestion ratio across seeds");
  GeneratorFlags sweep_gen;
  SolverFlags sweep_solver;
  std::vector<double> sweep_alphas, sweep_ratios;
  std::size_t sweep_seeds = 1;
  std::vector<std::string> sweep_policies;
  std::string sweep_out;
  sweep_gen.attach(sweep);
  sweep_solver.attach(sweep);
  sweep->add_option("--alphas", sweep_alphas, "Comma-separated alpha values")->required()->delimiter(',');
  sweep->add_option("--ratios", sweep_ratios, "Comma-separated congestion ratios")->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "Number of consecutive seeds starting at --seed");
  sweep->add_option("-p,--policies", sweep_policies, "Comma-separated policies (default: all)")->delimiter(',');
  sweep->add_option("-o,--output", sweep_out, "Output directory")->required();

  auto* val = app.add_subcommand("validate", "Check stored schedules against the constraints");
  std::string val_scenario, val_dir;
  std::vector<std::string> val_policies;
  val->add_option("-s,--scenario", val_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  val->add_option("-r,--results", val_dir, "Result directory")->required()->check(CLI::ExistingDirectory);
  val->add_option("-p,--policies", val_policies, "Comma-separated policies (default: all found)")->delimiter(',');

  auto* ing = app.add_subcommand("ingest", "Convert a session log into a scenario");
  std::string ing_in, ing_map, ing_out;
  double ing_delta = 0.25, ing_congestion = 0.5;
  int ing_horizon = 96;
  std::optional<double> ing_capacity;
  ing->add_option("-i,--input", ing_in, "Session log (CSV)")->required();
  ing->add_option("-m,--mapping", ing_map, "Column mapping (JSON)")->required()->check(CLI::ExistingFile);
  ing->add_option("-o,--output", ing_out, "Scenario file to write")->required();
  ing->add_option("--delta", ing_delta, "Step length (hours)");
  ing->add_option("--horizon", ing_horizon, "Number of steps");
  ing->add_option("--capacity", ing_capacity, "Constant station capacity (kW)");
  ing->add_option("--congestion", ing_congestion, "Capacity as a fraction of peak nominal demand");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(gen_flags, gen_out, out, err);
    if (*run_cmd) return cmd_run(run_scenario, run_policies_flag, run_solver, run_out, out, err);
    if (*sweep)
      return cmd_sweep(sweep_gen, sweep_solver, sweep_alphas, sweep_ratios, sweep_seeds, sweep_policies, sweep_out,
                       out, err);
    if (*val) return cmd_validate(val_scenario, val_dir, val_policies, out, err);
    if (*ing)
      return cmd_ingest(ing_in, ing_map, ing_out, ing_delta, ing_horizon, ing_capacity, ing_congestion, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace socev::cli
