#include "socev/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

#include "socev/csv.hpp"

namespace socev {

using nlohmann::json;

std::string to_string(ScenarioSource source) {
  return source == ScenarioSource::synthetic ? "synthetic" : "ingested";
}

void ScenarioFile::validate() const {
  validate_config(config);
  for (const auto& s : sessions) validate_session(s, config.horizon);
}

std::string scenario_to_json(const ScenarioFile& sc) {
  json capacity;
  const auto& cap = sc.config.capacity;
  const bool constant =
      !cap.empty() && std::all_of(cap.begin(), cap.end(), [&](double p) { return p == cap.front(); }) &&
      cap.size() == static_cast<std::size_t>(sc.config.horizon);
  if (constant)
    capacity = cap.front();
  else
    capacity = cap;

  json sessions = json::array();
  for (const auto& s : sc.sessions)
    sessions.push_back({{"id", s.id},
                        {"t_arrival", s.t_arrival},
                        {"t_depart", s.t_depart},
                        {"x_initial", s.x_initial},
                        {"x_final", s.x_final},
                        {"u_star", s.u_star},
                        {"alpha", s.alpha}});

  const json doc = {
      {"schema_version", sc.schema_version},
      {"metadata",
       {{"name", sc.metadata.name},
        {"seed", sc.metadata.seed},
        {"source", to_string(sc.metadata.source)},
        {"rng", sc.metadata.rng}}},
      {"config", {{"capacity", capacity}, {"delta", sc.config.delta}, {"horizon", sc.config.horizon}}},
      {"sessions", sessions},
  };
  return doc.dump(2) + "\n";
}

namespace {

template <class T>
T field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key))
    throw std::invalid_argument(std::string(where) + ": missing '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string(where) + ": bad type for '" + key + "'");
  }
}

}  // namespace

ScenarioFile scenario_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario is not valid JSON: ") + e.what());
  }

  ScenarioFile sc;
  sc.schema_version = field<int>(doc, "schema_version", "scenario");
  if (sc.schema_version != kScenarioSchemaVersion)
    throw std::invalid_argument("unsupported schema_version " + std::to_string(sc.schema_version));

  const json& meta = doc.contains("metadata") ? doc.at("metadata") : json::object();
  if (meta.contains("name")) sc.metadata.name = field<std::string>(meta, "name", "metadata");
  if (meta.contains("seed")) sc.metadata.seed = field<std::uint64_t>(meta, "seed", "metadata");
  if (meta.contains("rng")) sc.metadata.rng = field<std::string>(meta, "rng", "metadata");
  if (meta.contains("source")) {
    const auto src = field<std::string>(meta, "source", "metadata");
    if (src == "synthetic")
      sc.metadata.source = ScenarioSource::synthetic;
    else if (src == "ingested")
      sc.metadata.source = ScenarioSource::ingested;
    else
      throw std::invalid_argument("metadata: unknown source '" + src + "'");
  }

  if (!doc.contains("config")) throw std::invalid_argument("scenario: missing 'config'");
  const json& cfg = doc.at("config");
  sc.config.delta = field<double>(cfg, "delta", "config");
  sc.config.horizon = field<int>(cfg, "horizon", "config");
  if (!cfg.contains("capacity")) throw std::invalid_argument("config: missing 'capacity'");
  const json& cap = cfg.at("capacity");
  if (cap.is_number()) {
    if (sc.config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    sc.config.capacity.assign(static_cast<std::size_t>(sc.config.horizon), cap.get<double>());
  } else {
    sc.config.capacity = field<std::vector<double>>(cfg, "capacity", "config");
  }

  if (!doc.contains("sessions") || !doc.at("sessions").is_array())
    throw std::invalid_argument("scenario: 'sessions' must be an array");
  for (const json& js : doc.at("sessions")) {
    SessionSpec s;
    s.id = field<std::size_t>(js, "id", "session");
    s.t_arrival = field<int>(js, "t_arrival", "session");
    s.t_depart = field<int>(js, "t_depart", "session");
    s.x_initial = field<double>(js, "x_initial", "session");
    s.x_final = field<double>(js, "x_final", "session");
    s.u_star = field<double>(js, "u_star", "session");
    s.alpha = field<double>(js, "alpha", "session");
    sc.sessions.push_back(s);
  }
  sc.validate();
  return sc;
}

void save_scenario(const ScenarioFile& scenario, const std::filesystem::path& path) {
  write_text(path, scenario_to_json(scenario));
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  const auto text = read_text(path);
  try {
    return scenario_from_json(text);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace socev
