#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "socev/model.hpp"

namespace socev {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr std::string_view kRngName = "mt19937_64";

enum class ScenarioSource { synthetic, ingested };

std::string to_string(ScenarioSource source);

struct ScenarioMetadata {
  std::string name;
  std::uint64_t seed = 0;
  ScenarioSource source = ScenarioSource::synthetic;
  std::string rng{kRngName};

  friend bool operator==(const ScenarioMetadata&, const ScenarioMetadata&) = default;
};

struct ScenarioFile {
  int schema_version = kScenarioSchemaVersion;
  ScenarioMetadata metadata;
  StationConfig config;
  std::vector<SessionSpec> sessions;

  /// validate_config plus validate_session on every session; throws std::invalid_argument.
  void validate() const;

  friend bool operator==(const ScenarioFile&, const ScenarioFile&) = default;
};

/// JSON text with a trailing newline. A capacity series with a single repeated value
/// is written as a number, otherwise as an array.
std::string scenario_to_json(const ScenarioFile& scenario);

/// Parses and validates. Throws std::invalid_argument on schema or invariant errors.
ScenarioFile scenario_from_json(std::string_view text);

void save_scenario(const ScenarioFile& scenario, const std::filesystem::path& path);
ScenarioFile load_scenario(const std::filesystem::path& path);

}  // namespace socev
