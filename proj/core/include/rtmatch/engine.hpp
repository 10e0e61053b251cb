#pragma once

// Discrete-time simulation of the matching queue. One arrival is drawn per
// step; then the whole queue is actualised (aging, reneging, predictive
// redraws, MELD-exception grants, MELD moves); then the incoming donor is
// matched or the incoming recipient joins the tail of the queue.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rtmatch/classes.hpp"
#include "rtmatch/item.hpp"
#include "rtmatch/policies.hpp"
#include "rtmatch/rng.hpp"
#include "rtmatch/survival.hpp"
#include "rtmatch/transitions.hpp"

namespace rtmatch {

struct EngineConfig {
  int steps_per_year = 3108;
  /// P_arr over the donor and the non-awaiting CIRRH/HCC/OTHER classes.
  /// MXP and awaiting classes must be 0 (they are reached by transitions/flags).
  std::array<double, kClassCount> arrival_probability{};
  /// Probability that an arrival of a non-awaiting CIRRH/OTHER B1-B3 class is
  /// flagged as awaiting a MELD exception; keyed by the non-awaiting class.
  std::array<double, kClassCount> awaits_probability{};
  Years mean_meld_change_years = 2.0;
  Years initiation_years = 15.0;
  Years study_years = 10.0;
  Years incident_window_years = 2.0;

  Years step_length() const { return 1.0 / static_cast<double>(steps_per_year); }
  /// Geometric per-step MELD move probability with the same mean as Exp(1/mean).
  double meld_step_probability() const;
  std::int64_t steps_for(Years years) const;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const EngineConfig& config);

/// Everything the dynamics read, with per-class laws resolved once.
class Models {
 public:
  Models(CoxModel patience, EmpiricalLaw mxp_predictive, MxpGrantModel grant, ScoreParams score,
         TransitionGraph transitions);

  const CompatibilityGraph& compatibility() const { return compatibility_; }
  const TransitionGraph& transitions() const { return transitions_; }
  const CoxModel& patience() const { return patience_; }
  const EmpiricalLaw& mxp_predictive() const { return mxp_predictive_; }
  const MxpGrantModel& grant() const { return grant_; }
  const ScoreParams& score() const { return score_; }

  /// Real patience law of a recipient class (Cox, by indication and band).
  const PatienceLaw& real_law(ClassId id) const { return real_[id.index()]; }
  /// Predictive law: the tabulated law for MXP classes, the real law otherwise.
  const PatienceLaw& predictive_law(ClassId id) const { return predictive_[id.index()]; }

 private:
  CompatibilityGraph compatibility_;
  TransitionGraph transitions_;
  CoxModel patience_;
  EmpiricalLaw mxp_predictive_;
  MxpGrantModel grant_;
  ScoreParams score_;
  std::array<PatienceLaw, kClassCount> real_;
  std::array<PatienceLaw, kClassCount> predictive_;
};

enum class Phase : std::uint8_t { Initiation, Study };

enum class Outcome : std::uint8_t { Transplanted, Deceased, Alive };

/// Final state of one recipient observed during the study phase.
struct FateRecord {
  std::int64_t id = 0;
  ClassId initial_class;  // the MXP class if an exception was granted
  Outcome outcome = Outcome::Alive;
  Years time_in_system = 0.0;  // counted from max(arrival, study start)
  Years arrival_time = 0.0;    // study clock; negative for prevalent items
  bool incident = false;       // arrived within the incident window
  bool prevalent = false;      // id < 0

  friend bool operator==(const FateRecord&, const FateRecord&) = default;
};

struct MeldMove {
  std::int64_t id;
  ClassId from;
  ClassId to;
  friend bool operator==(const MeldMove&, const MeldMove&) = default;
};

struct Transplant {
  std::int64_t donor_id;
  std::int64_t recipient_id;
  friend bool operator==(const Transplant&, const Transplant&) = default;
};

/// What happened during one step.
struct StepEvents {
  std::int64_t step = 0;
  Years time = 0.0;
  std::optional<std::int64_t> arrival_id;
  bool donor_suppressed = false;
  std::vector<std::int64_t> reneged;
  std::vector<Transplant> transplants;
  std::vector<std::int64_t> discarded;
  std::vector<std::int64_t> mxp_grants;
  std::vector<MeldMove> meld_moves;
  std::vector<std::int64_t> predictive_redraws;

  void clear();
  bool empty() const;
};

/// Bookkeeping identity inputs for one phase.
struct PhaseTally {
  std::int64_t initial_queue = 0;
  std::int64_t recipient_arrivals = 0;
  std::int64_t donor_arrivals = 0;  // after thinning
  std::int64_t donors_suppressed = 0;
  std::int64_t transplants = 0;
  std::int64_t renegings = 0;
  std::int64_t discarded = 0;
  std::int64_t still_waiting = 0;
  std::int64_t mxp_grants = 0;
  std::int64_t meld_moves = 0;
  std::int64_t predictive_redraws = 0;

  /// initial + recipient arrivals = transplants + renegings + still waiting,
  /// and donor arrivals = transplants + discarded.
  bool balanced() const;
};

/// Mutable state of one replication.
struct SimState {
  QueueState queue;
  std::int64_t clock = 0;  // step index; study phase starts at 0
  std::int64_t next_prevalent_id = -1;
  std::int64_t next_incident_id = 1;
};

struct PhaseResult {
  PhaseTally tally;
  std::vector<FateRecord> ledger;  // empty for the initiation phase
};

using EventSink = std::function<void(Phase, const StepEvents&)>;

class Engine {
 public:
  /// Throws std::invalid_argument if the configuration is invalid.
  Engine(const Models& models, const EngineConfig& config);

  const EngineConfig& config() const { return config_; }
  const Models& models() const { return models_; }
  Years step_length() const { return dt_; }
  double meld_step_probability() const { return p_meld_; }

  /// Draws this step's arrival from the arrivals stream. Returns nothing when a
  /// donor is suppressed by shortage thinning. Every draw is consumed
  /// regardless of `shortage`, so the stream stays aligned across levels.
  std::optional<Item> incoming(SimState& state, Phase phase, double shortage, RandomStream& rng) const;

  /// Ages every queued item by one step and applies, per item in arrival
  /// order: reneging, predictive redraw, exception grant, MELD move.
  void actualize(SimState& state, RandomStream& rng, StepEvents& events, PhaseTally& tally,
                 std::vector<FateRecord>* ledger) const;

  /// Awaiting -> MXP (same band). Resets the waiting time, redraws real patience
  /// from the conditional-shifted MXP law and predictive patience from the
  /// tabulated law. Throws std::logic_error if the item is not due.
  void grant_mxp(Item& item, RandomStream& rng) const;

  /// With the per-step MELD probability, moves an eligible item one or more
  /// bands up or down and redraws both patience times. Returns the move.
  std::optional<MeldMove> maybe_remeld(Item& item, RandomStream& rng) const;

  /// One step of the dynamic: arrival, actualisation, match or enqueue.
  void step(SimState& state, Phase phase, PolicyKind policy, double shortage, Streams& streams,
            StepEvents& events, PhaseTally& tally, std::vector<FateRecord>* ledger) const;

  /// Runs `steps` steps. The study phase records a fate for every recipient
  /// present at any time during the phase; the initiation phase records none.
  PhaseResult run_phase(SimState& state, Phase phase, std::int64_t steps, PolicyKind policy, double shortage,
                        Streams& streams, const EventSink& sink = {}) const;

  /// Initiation phase from an empty queue, shortage 0. Leaves the clock at 0.
  PhaseResult run_initiation(SimState& state, PolicyKind policy, Streams& streams,
                             const EventSink& sink = {}) const;

 private:
  Years now(const SimState& state) const { return static_cast<double>(state.clock) * dt_; }
  void record(std::vector<FateRecord>* ledger, const Item& item, Outcome outcome, Years at) const;

  const Models& models_;
  EngineConfig config_;
  Years dt_;
  double p_meld_;
  std::vector<double> arrival_cdf_;
  std::vector<ClassId> arrival_class_;
};

}  // namespace rtmatch
