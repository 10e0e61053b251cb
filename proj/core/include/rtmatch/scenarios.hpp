#pragma once

// Scenario matrix execution (policy x shortage x replication) and aggregation.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtmatch/engine.hpp"
#include "rtmatch/metrics.hpp"

namespace rtmatch {

struct ScenarioSpec {
  PolicyKind policy = PolicyKind::Esdf;
  double shortage = 0.0;
  int replications = 10;
  std::uint64_t seed = 0;

  /// e.g. "ESDF_s0.30"
  std::string label() const;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Strata reported per scenario: the four indications, then all of them.
inline constexpr std::size_t kStrataCount = kIndicationCount + 1;
inline constexpr std::size_t kOverall = kIndicationCount;

std::string_view stratum_name(std::size_t stratum);

struct ReplicationSummary {
  int replication = 0;
  std::array<OutcomeCounts, kStrataCount> incident{};
  std::array<OutcomeCounts, kStrataCount> prevalent{};
  CohortTable cohort{};
  PhaseTally study{};
  std::int64_t initial_queue = 0;
};

struct StratumSummary {
  std::optional<double> ddts;
  std::optional<double> ltx;
  std::optional<double> alive;
  double mean_cohort = 0.0;

  friend bool operator==(const StratumSummary&, const StratumSummary&) = default;
};

struct ScenarioResult {
  ScenarioSpec spec;
  CohortTable cohort_mean{};
  double cohort_total_mean = 0.0;
  std::array<StratumSummary, kStrataCount> incident{};
  std::array<StratumSummary, kStrataCount> prevalent{};
  double mean_initial_queue = 0.0;
  double mean_transplants = 0.0;
  double mean_renegings = 0.0;
  double mean_discarded = 0.0;
  double mean_donor_arrivals = 0.0;
  /// Mean over replications of each replication's own DDTS variance.
  std::optional<double> mean_replication_ddts_variance;

  friend bool operator==(const ScenarioResult&, const ScenarioResult&) = default;
};

/// Population variance of the replication-averaged CIRRH, HCC and OTHER DDTS
/// rates of `result`. Throws std::domain_error if any of them is undefined.
double ddts_variance(const ScenarioResult& result);

/// Summarises one study-phase ledger.
ReplicationSummary summarise_replication(int replication, std::span<const FateRecord> ledger,
                                         const PhaseTally& study_tally, std::int64_t initial_queue);

/// Folds replication summaries (sorted by replication id) into a result.
ScenarioResult aggregate(const ScenarioSpec& spec, std::span<const ReplicationSummary> replications);

struct RunOptions {
  /// Worker threads; 0 = hardware concurrency. Results do not depend on it.
  unsigned threads = 0;
  /// Optional per-run event sink factory. `label` is the scenario label, or
  /// "<POLICY>_initiation" for the shared initiation phase.
  std::function<EventSink(const std::string& label, int replication)> event_sink;
  /// Called after each (policy, replication) unit finishes; may be called
  /// from worker threads.
  std::function<void(const std::string& label, int replication)> on_unit_done;
};

/// Runs every scenario. For each (policy, seed, replication) the initiation
/// phase is run once from an empty queue without shortage, and every shortage
/// level of that policy continues from a copy of the resulting state and
/// random streams. Replication r of every scenario uses the streams derived
/// from (seed, r), so policies and shortage levels see identical arrivals.
std::vector<ScenarioResult> run_scenarios(std::span<const ScenarioSpec> specs, const EngineConfig& config,
                                          const Models& models, const RunOptions& options = {});

}  // namespace rtmatch
