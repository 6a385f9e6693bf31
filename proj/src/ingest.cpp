#include "socev/ingest.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "socev/csv.hpp"

namespace socev {

using nlohmann::json;

IngestMapping mapping_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("mapping is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("mapping must be a JSON object");

  IngestMapping m;
  auto str = [&](const char* key, std::string& out, bool required) {
    if (doc.contains(key)) {
      if (!doc.at(key).is_string()) throw std::invalid_argument(std::string("mapping: '") + key + "' must be a string");
      out = doc.at(key).get<std::string>();
    } else if (required) {
      throw std::invalid_argument(std::string("mapping: missing '") + key + "'");
    }
  };
  str("arrival", m.arrival_column, true);
  str("departure", m.departure_column, true);
  str("energy", m.energy_column, false);
  str("x_final", m.x_final_column, false);
  str("id", m.id_column, false);
  str("x_initial", m.x_initial_column, false);
  str("u_star", m.u_star_column, false);
  str("alpha", m.alpha_column, false);
  str("time_format", m.time_format, false);
  str("origin", m.origin, false);
  if (m.energy_column.empty() && m.x_final_column.empty())
    throw std::invalid_argument("mapping: need 'energy' or 'x_final'");
  if (m.time_format != "step" && m.origin.empty())
    throw std::invalid_argument("mapping: timestamp formats need an 'origin'");

  if (doc.contains("defaults")) {
    const json& d = doc.at("defaults");
    try {
      if (d.contains("x_initial")) m.x_initial = d.at("x_initial").get<double>();
      if (d.contains("u_star")) m.u_star = d.at("u_star").get<double>();
      if (d.contains("alpha")) m.alpha = d.at("alpha").get<double>();
    } catch (const json::exception&) {
      throw std::invalid_argument("mapping: defaults must be numbers");
    }
  }
  return m;
}

IngestMapping load_mapping(const std::filesystem::path& path) {
  try {
    return mapping_from_json(read_text(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

IngestMapping native_mapping() {
  IngestMapping m;
  m.id_column = "id";
  m.arrival_column = "t_arrival";
  m.departure_column = "t_depart";
  m.x_initial_column = "x_initial";
  m.x_final_column = "x_final";
  m.u_star_column = "u_star";
  m.alpha_column = "alpha";
  return m;
}

long long parse_timestamp(std::string_view text, const std::string& pattern) {
  std::tm tm{};
  std::istringstream in{std::string(text)};
  in >> std::get_time(&tm, pattern.c_str());
  if (in.fail()) throw std::invalid_argument("timestamp '" + std::string(text) + "' does not match '" + pattern + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{tm.tm_year + 1900}, month{static_cast<unsigned>(tm.tm_mon + 1)},
                           day{static_cast<unsigned>(tm.tm_mday)}};
  if (!ymd.ok()) throw std::invalid_argument("invalid date in '" + std::string(text) + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<long long>(days) * 86400LL + tm.tm_hour * 3600LL + tm.tm_min * 60LL + tm.tm_sec;
}

IngestResult ingest_sessions(const std::filesystem::path& path, const IngestMapping& m,
                             const StationConfig& config) {
  validate_config(config);
  const CsvTable table = read_csv(path);

  auto col = [&](const std::string& name) -> long {
    return name.empty() ? -1 : static_cast<long>(table.column(name));
  };
  const long c_arr = col(m.arrival_column);
  const long c_dep = col(m.departure_column);
  const long c_xf = col(m.x_final_column);
  const long c_energy = c_xf >= 0 ? -1 : col(m.energy_column);
  const long c_id = col(m.id_column);
  const long c_x0 = col(m.x_initial_column);
  const long c_ustar = col(m.u_star_column);
  const long c_alpha = col(m.alpha_column);

  const bool steps = m.time_format == "step";
  const long long origin = steps ? 0 : parse_timestamp(m.origin, m.time_format);
  const double step_seconds = config.delta * 3600.0;

  // Position on the step grid, before rounding.
  auto grid_position = [&](const std::string& cell) {
    if (steps) return parse_number(cell);
    return static_cast<double>(parse_timestamp(cell, m.time_format) - origin) / step_seconds;
  };

  IngestResult out;
  out.scenario.metadata.name = path.stem().string();
  out.scenario.metadata.source = ScenarioSource::ingested;
  out.scenario.config = config;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ++out.rows;
    const std::string where = "row " + std::to_string(r + 2);
    try {
      if (row.size() != table.header.size()) throw std::invalid_argument("expected " + std::to_string(table.header.size()) + " fields");
      auto cell = [&](long c) -> const std::string& { return row[static_cast<std::size_t>(c)]; };

      SessionSpec s;
      s.id = c_id >= 0 ? static_cast<std::size_t>(parse_integer(cell(c_id))) : out.scenario.sessions.size();
      if (c_id >= 0 && parse_integer(cell(c_id)) < 0) throw std::invalid_argument("negative id");
      const double raw_a = grid_position(cell(c_arr));
      const double raw_d = grid_position(cell(c_dep));
      if (!(raw_d > raw_a)) throw std::invalid_argument("departure not after arrival");
      const double a = std::floor(raw_a);
      const double d = std::ceil(raw_d);
      if (a < -1e9 || d > 1e9) throw std::invalid_argument("time out of range");
      s.t_arrival = static_cast<int>(a);
      s.t_depart = static_cast<int>(d);
      s.x_initial = c_x0 >= 0 ? parse_number(cell(c_x0)) : m.x_initial;
      s.x_final = c_xf >= 0 ? parse_number(cell(c_xf)) : s.x_initial + parse_number(cell(c_energy));
      s.u_star = c_ustar >= 0 ? parse_number(cell(c_ustar)) : m.u_star;
      s.alpha = c_alpha >= 0 ? parse_number(cell(c_alpha)) : m.alpha;
      validate_session(s, config.horizon);
      out.scenario.sessions.push_back(s);
    } catch (const std::invalid_argument& e) {
      ++out.dropped;
      out.notes.push_back(where + ": " + e.what());
    }
  }
  if (out.scenario.sessions.empty())
    throw std::invalid_argument(path.string() + ": no valid session rows (" + std::to_string(out.dropped) + " dropped)");
  return out;
}

std::string sessions_to_csv(std::span<const SessionSpec> sessions) {
  std::ostringstream out;
  write_csv_row(out, {"id", "t_arrival", "t_depart", "x_initial", "x_final", "u_star", "alpha"});
  for (const auto& s : sessions)
    write_csv_row(out, {std::to_string(s.id), std::to_string(s.t_arrival), std::to_string(s.t_depart),
                        format_number(s.x_initial), format_number(s.x_final), format_number(s.u_star),
                        format_number(s.alpha)});
  return out.str();
}

}  // namespace socev
