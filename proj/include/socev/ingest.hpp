#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socev/model.hpp"
#include "socev/scenario.hpp"

namespace socev {

/// Column mapping for a session log. Times are either step indices ("step") or
/// timestamps parsed with a std::get_time pattern and measured from `origin`.
/// Optional columns may be left empty, in which case the default applies.
struct IngestMapping {
  std::string arrival_column;
  std::string departure_column;
  std::string energy_column;   // requested energy, kWh; x_final = x_initial + energy
  std::string x_final_column;  // used instead of energy_column when set
  std::string id_column;       // integer ids; rows are numbered in file order otherwise
  std::string x_initial_column;
  std::string u_star_column;
  std::string alpha_column;

  std::string time_format = "step";
  std::string origin;  // timestamp of step 0, same pattern as the columns

  double x_initial = 0.0;  // kWh
  double u_star = 6.6;     // kW
  double alpha = 0.1;      // kW/kWh
};

/// Reads a mapping document; throws std::invalid_argument when required keys are missing.
IngestMapping mapping_from_json(std::string_view text);
IngestMapping load_mapping(const std::filesystem::path& path);

/// Mapping for the CSV written by sessions_to_csv.
IngestMapping native_mapping();

struct IngestResult {
  ScenarioFile scenario;
  std::size_t rows = 0;
  std::size_t dropped = 0;
  std::vector<std::string> notes;  // one line per dropped row
};

/// Quantizes arrival times down and departure times up to the config's step grid.
/// Rows that break a session invariant (including zero-length stays after
/// quantization) are dropped and counted. Throws std::runtime_error for unreadable
/// files and std::invalid_argument for missing columns or when no row survives.
IngestResult ingest_sessions(const std::filesystem::path& path, const IngestMapping& mapping,
                             const StationConfig& config);

/// Seconds since the Unix epoch for a timestamp in the given get_time pattern (UTC).
long long parse_timestamp(std::string_view text, const std::string& pattern);

/// CSV with columns id, t_arrival, t_depart, x_initial, x_final, u_star, alpha.
std::string sessions_to_csv(std::span<const SessionSpec> sessions);

}  // namespace socev
