#pragma once

// Result files: cohort.csv, rates.csv, prevalent.csv, variance.csv,
// results.json, and the two SVG figures. All numeric text is produced with
// std::to_chars, so output does not depend on the process locale.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtmatch/scenarios.hpp"

namespace rtmatch {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResultsDocument {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::vector<ScenarioResult> scenarios;

  friend bool operator==(const ResultsDocument&, const ResultsDocument&) = default;
};

nlohmann::json results_to_json(const ResultsDocument& doc);
/// Inverse of results_to_json. Throws OutputError on schema mismatch.
ResultsDocument results_from_json(const nlohmann::json& j);

/// Shortest round-trip decimal form; "NA" for an empty optional.
std::string format_number(double v);
std::string format_number(const std::optional<double>& v);

std::string cohort_csv(const std::vector<ScenarioResult>& results);
std::string rates_csv(const std::vector<ScenarioResult>& results);
std::string prevalent_csv(const std::vector<ScenarioResult>& results);
std::string variance_csv(const std::vector<ScenarioResult>& results);
std::string rates_figure_svg(const std::vector<ScenarioResult>& results);
std::string variance_figure_svg(const std::vector<ScenarioResult>& results);

/// Writes every output file into `dir` (created if needed) and returns the
/// paths written. Throws std::invalid_argument for empty results and
/// OutputError when the directory or a file cannot be written.
std::vector<std::filesystem::path> emit_results(const ResultsDocument& doc, const std::filesystem::path& dir);

}  // namespace rtmatch
