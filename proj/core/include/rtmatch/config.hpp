#pragma once

// Scenario configuration file (JSON). Every key is optional; absent keys take
// the shipped calibrated defaults. Unknown keys are rejected. The grammar is
// documented key by key in docs/config.md.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rtmatch/engine.hpp"
#include "rtmatch/policies.hpp"
#include "rtmatch/scenarios.hpp"
#include "rtmatch/survival.hpp"

#include <nlohmann/json.hpp>

namespace rtmatch {

/// Validation or parse failure; `key()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  EngineConfig engine;
  double meld_up_probability = kDefaultUpProbability;
  CoxModel patience;
  std::vector<double> mxp_predictive_monthly;  // survival at 0, 1, ..., months
  MxpGrantModel grant;
  ScoreParams score;

  std::vector<PolicyKind> policies;
  std::vector<double> shortage_levels;
  int replications = 10;
  std::uint64_t seed = 0;
  std::string output_dir = "results";

  /// Policies outer, shortage levels inner.
  std::vector<ScenarioSpec> scenarios() const;

  /// xi per class: the arrival probability of the class net of awaiting flags.
  ArrivalWeights meld_weights() const;

  Models build_models() const;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// The shipped calibrated defaults.
RunConfig default_run_config();

/// Parses JSON text over the defaults and validates the result.
RunConfig parse_config_text(std::string_view text, const std::string& source = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

/// Full canonical form (every key present).
nlohmann::json to_json(const RunConfig& config);

/// FNV-1a of the canonical JSON without `output_dir`: changes iff a
/// semantically meaningful field changes.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace rtmatch
