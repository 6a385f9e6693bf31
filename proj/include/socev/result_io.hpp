#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "socev/simulator.hpp"

namespace socev {

/// Columns: t, capacity_kw, commanded_kw, applied_kw, active_count.
std::string steps_to_csv(const ScenarioResult& result);

/// Policy, aggregates, per-vehicle table, events and the full schedule.
std::string result_to_json(const ScenarioResult& result);

/// Rebuilds a result from its two documents. Throws std::invalid_argument on malformed input.
ScenarioResult result_from_documents(std::string_view steps_csv, std::string_view result_json);

struct ResultPaths {
  std::filesystem::path steps_csv;
  std::filesystem::path result_json;
};

/// <dir>/<stem>_steps.csv and <dir>/<stem>_result.json.
ResultPaths result_paths(const std::filesystem::path& dir, std::string_view stem);

ResultPaths write_result(const ScenarioResult& result, const std::filesystem::path& dir, std::string_view stem);
ScenarioResult read_result(const std::filesystem::path& dir, std::string_view stem);

/// One result pair per policy (stem = policy name) plus summary.json and summary.csv
/// with a row per policy: delivered, feasible rate, clipped, commanded, mean final
/// state, solves, solver failures.
void write_comparison(std::span<const ScenarioResult> results, const std::filesystem::path& dir);

std::string summary_csv(std::span<const ScenarioResult> results);

}  // namespace socev
