#include "socev/result_io.hpp"

#include <json.hpp>

#include <sstream>
#include <stdexcept>

#include "socev/csv.hpp"

namespace socev {

using nlohmann::json;

std::string steps_to_csv(const ScenarioResult& r) {
  std::ostringstream out;
  write_csv_row(out, {"t", "capacity_kw", "commanded_kw", "applied_kw", "active_count"});
  for (const auto& s : r.steps)
    write_csv_row(out, {std::to_string(s.t), format_number(s.capacity), format_number(s.commanded),
                        format_number(s.applied), std::to_string(s.active)});
  return out.str();
}

namespace {

json matrix_rows(const ScheduleMatrix& m, bool applied) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.vehicles(); ++i) {
    const auto row = applied ? m.applied_row(i) : m.commanded_row(i);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

EventKind event_kind(const std::string& s) {
  for (EventKind k : {EventKind::arrival, EventKind::departure, EventKind::target_met, EventKind::horizon_end})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown event kind '" + s + "'");
}

}  // namespace

std::string result_to_json(const ScenarioResult& r) {
  json vehicles = json::array();
  for (const auto& v : r.vehicles)
    vehicles.push_back({{"id", v.id},
                        {"delivered_kwh", v.delivered},
                        {"x_end_kwh", v.x_end},
                        {"target_met", v.target_met},
                        {"completion_step", v.completion_step ? json(*v.completion_step) : json(nullptr)}});
  json events = json::array();
  for (const auto& e : r.events)
    events.push_back({{"t", e.t}, {"kind", to_string(e.kind)}, {"vehicle", e.vehicle ? json(*e.vehicle) : json(nullptr)}});

  const auto& a = r.aggregate;
  const json doc = {
      {"policy", r.policy},
      {"delta", r.delta},
      {"aggregate",
       {{"delivered_kwh", a.delivered},
        {"feasible_rate", a.feasible_rate},
        {"clipped_kwh", a.clipped},
        {"commanded_kwh", a.commanded},
        {"mean_final_state_kwh", r.mean_final_state()},
        {"solves", a.solves},
        {"solver_failures", a.solver_failures}}},
      {"vehicles", vehicles},
      {"events", events},
      {"schedule",
       {{"vehicles", r.schedule.vehicles()},
        {"steps", r.schedule.steps()},
        {"commanded_kw", matrix_rows(r.schedule, false)},
        {"applied_kw", matrix_rows(r.schedule, true)}}},
  };
  return doc.dump(2) + "\n";
}

ScenarioResult result_from_documents(std::string_view steps_csv, std::string_view result_json) {
  ScenarioResult r;
  try {
    const json doc = json::parse(result_json);
    r.policy = doc.at("policy").get<std::string>();
    r.delta = doc.at("delta").get<double>();
    const json& a = doc.at("aggregate");
    r.aggregate.delivered = a.at("delivered_kwh").get<double>();
    r.aggregate.feasible_rate = a.at("feasible_rate").get<double>();
    r.aggregate.clipped = a.at("clipped_kwh").get<double>();
    r.aggregate.commanded = a.at("commanded_kwh").get<double>();
    r.aggregate.solves = a.at("solves").get<std::size_t>();
    r.aggregate.solver_failures = a.at("solver_failures").get<std::size_t>();
    for (const json& v : doc.at("vehicles")) {
      VehicleRecord rec;
      rec.id = v.at("id").get<std::size_t>();
      rec.delivered = v.at("delivered_kwh").get<double>();
      rec.x_end = v.at("x_end_kwh").get<double>();
      rec.target_met = v.at("target_met").get<bool>();
      if (!v.at("completion_step").is_null()) rec.completion_step = v.at("completion_step").get<int>();
      r.vehicles.push_back(rec);
    }
    for (const json& e : doc.at("events")) {
      SimEvent ev;
      ev.t = e.at("t").get<int>();
      ev.kind = event_kind(e.at("kind").get<std::string>());
      if (!e.at("vehicle").is_null()) ev.vehicle = e.at("vehicle").get<std::size_t>();
      r.events.push_back(ev);
    }
    const json& sched = doc.at("schedule");
    const auto nv = sched.at("vehicles").get<std::size_t>();
    const auto nt = sched.at("steps").get<std::size_t>();
    r.schedule = ScheduleMatrix(nv, nt);
    const auto cmd = sched.at("commanded_kw").get<std::vector<std::vector<double>>>();
    const auto app = sched.at("applied_kw").get<std::vector<std::vector<double>>>();
    if (cmd.size() != nv || app.size() != nv) throw std::invalid_argument("schedule row count mismatch");
    for (std::size_t i = 0; i < nv; ++i) {
      if (cmd[i].size() != nt || app[i].size() != nt) throw std::invalid_argument("schedule column count mismatch");
      for (std::size_t t = 0; t < nt; ++t) {
        r.schedule.commanded(i, t) = cmd[i][t];
        r.schedule.applied(i, t) = app[i][t];
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed result document: ") + e.what());
  }

  const CsvTable table = parse_csv(steps_csv);
  const std::size_t ct = table.column("t"), cc = table.column("capacity_kw"), ccmd = table.column("commanded_kw"),
                    capp = table.column("applied_kw"), cact = table.column("active_count");
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::invalid_argument("ragged steps CSV");
    StepRecord s;
    s.t = static_cast<int>(parse_integer(row[ct]));
    s.capacity = parse_number(row[cc]);
    s.commanded = parse_number(row[ccmd]);
    s.applied = parse_number(row[capp]);
    s.active = static_cast<std::size_t>(parse_integer(row[cact]));
    r.steps.push_back(s);
  }
  return r;
}

ResultPaths result_paths(const std::filesystem::path& dir, std::string_view stem) {
  const std::string s(stem);
  return {dir / (s + "_steps.csv"), dir / (s + "_result.json")};
}

ResultPaths write_result(const ScenarioResult& result, const std::filesystem::path& dir, std::string_view stem) {
  const auto paths = result_paths(dir, stem);
  write_text(paths.steps_csv, steps_to_csv(result));
  write_text(paths.result_json, result_to_json(result));
  return paths;
}

ScenarioResult read_result(const std::filesystem::path& dir, std::string_view stem) {
  const auto paths = result_paths(dir, stem);
  try {
    return result_from_documents(read_text(paths.steps_csv), read_text(paths.result_json));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(paths.result_json.string() + ": " + e.what());
  }
}

std::string summary_csv(std::span<const ScenarioResult> results) {
  std::ostringstream out;
  write_csv_row(out, {"policy", "delivered_kwh", "feasible_rate", "clipped_kwh", "commanded_kwh",
                      "mean_final_state_kwh", "solves", "solver_failures"});
  for (const auto& r : results) {
    const auto& a = r.aggregate;
    write_csv_row(out, {r.policy, format_number(a.delivered), format_number(a.feasible_rate),
                        format_number(a.clipped), format_number(a.commanded), format_number(r.mean_final_state()),
                        std::to_string(a.solves), std::to_string(a.solver_failures)});
  }
  return out.str();
}

void write_comparison(std::span<const ScenarioResult> results, const std::filesystem::path& dir) {
  json rows = json::array();
  for (const auto& r : results) {
    const auto paths = write_result(r, dir, r.policy);
    const auto& a = r.aggregate;
    rows.push_back({{"policy", r.policy},
                    {"delivered_kwh", a.delivered},
                    {"feasible_rate", a.feasible_rate},
                    {"clipped_kwh", a.clipped},
                    {"commanded_kwh", a.commanded},
                    {"mean_final_state_kwh", r.mean_final_state()},
                    {"solves", a.solves},
                    {"solver_failures", a.solver_failures},
                    {"steps_csv", paths.steps_csv.filename().string()},
                    {"result_json", paths.result_json.filename().string()}});
  }
  write_text(dir / "summary.json", json{{"results", rows}}.dump(2) + "\n");
  write_text(dir / "summary.csv", summary_csv(results));
}

}  // namespace socev
