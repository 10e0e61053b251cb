#include "rtmatch/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rtmatch {

namespace {

bool arrival_class_allowed(ClassId id) {
  if (id.is_donor()) return true;
  const RecipientClass& rc = id.recipient_class();
  return !rc.awaits_mxp && rc.indication != Indication::Mxp;
}

bool may_await(ClassId id) {
  if (id.is_donor()) return false;
  const RecipientClass& rc = id.recipient_class();
  return !rc.awaits_mxp && rc.meld <= MeldBand::B3 &&
         (rc.indication == Indication::Cirrh || rc.indication == Indication::Other);
}

ClassId with_awaiting(ClassId id) {
  RecipientClass rc = id.recipient_class();
  rc.awaits_mxp = true;
  return ClassId::recipient(rc);
}

}  // namespace

double EngineConfig::meld_step_probability() const {
  return -std::expm1(-(1.0 / mean_meld_change_years) / static_cast<double>(steps_per_year));
}

std::int64_t EngineConfig::steps_for(Years years) const {
  return static_cast<std::int64_t>(std::llround(years * static_cast<double>(steps_per_year)));
}

void validate(const EngineConfig& config) {
  if (config.steps_per_year < 2) {
    throw std::invalid_argument("engine.steps_per_year must be >= 2 (the exception timer needs a margin)");
  }
  auto nonneg = [](double v) { return v >= 0.0 && std::isfinite(v); };
  if (!(config.mean_meld_change_years > 0.0) || !std::isfinite(config.mean_meld_change_years)) {
    throw std::invalid_argument("engine.mean_meld_change_years must be positive");
  }
  if (!nonneg(config.initiation_years)) throw std::invalid_argument("engine.initiation_years must be >= 0");
  if (!nonneg(config.study_years)) throw std::invalid_argument("engine.study_years must be >= 0");
  if (!nonneg(config.incident_window_years)) {
    throw std::invalid_argument("engine.incident_window_years must be >= 0");
  }
  double total = 0.0;
  for (ClassId id : enumerate_classes()) {
    const double p = config.arrival_probability[id.index()];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("arrivals probability for " + to_string(id) + " must lie in [0, 1]");
    }
    if (p > 0.0 && !arrival_class_allowed(id)) {
      throw std::invalid_argument("arrivals probability for " + to_string(id) + " must be 0");
    }
    total += p;
    const double q = config.awaits_probability[id.index()];
    if (!(q >= 0.0 && q <= 1.0)) {
      throw std::invalid_argument("awaits_mxp probability for " + to_string(id) + " must lie in [0, 1]");
    }
    if (q > 0.0 && !may_await(id)) {
      throw std::invalid_argument("awaits_mxp probability for " + to_string(id) + " must be 0");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("arrivals probabilities sum to " + std::to_string(total) + ", expected 1");
  }
}

Models::Models(CoxModel patience, EmpiricalLaw mxp_predictive, MxpGrantModel grant, ScoreParams score,
               TransitionGraph transitions)
    : transitions_(std::move(transitions)),
      patience_(patience),
      mxp_predictive_(std::move(mxp_predictive)),
      grant_(grant),
      score_(score) {
  validate(mxp_predictive_);
  validate(score_);
  real_[0] = NoPatience{};
  predictive_[0] = NoPatience{};
  for (std::size_t i = 1; i < kClassCount; ++i) {
    const ClassId id = ClassId::from_index(i);
    const RecipientClass& rc = id.recipient_class();
    const CoxLaw law = patience_.law(rc);
    validate(law);
    real_[i] = law;
    if (rc.indication == Indication::Mxp) {
      predictive_[i] = mxp_predictive_;
    } else {
      predictive_[i] = law;
    }
    if (rc.awaits_mxp) {
      validate(grant_.law(rc));
      transitions_.set_reset_rate(id, 1.0 / grant_.mean_time(rc));
    }
  }
}

void StepEvents::clear() {
  arrival_id.reset();
  donor_suppressed = false;
  reneged.clear();
  transplants.clear();
  discarded.clear();
  mxp_grants.clear();
  meld_moves.clear();
  predictive_redraws.clear();
}

bool StepEvents::empty() const {
  return !arrival_id && !donor_suppressed && reneged.empty() && transplants.empty() && discarded.empty() &&
         mxp_grants.empty() && meld_moves.empty() && predictive_redraws.empty();
}

bool PhaseTally::balanced() const {
  return initial_queue + recipient_arrivals == transplants + renegings + still_waiting &&
         donor_arrivals == transplants + discarded;
}

Engine::Engine(const Models& models, const EngineConfig& config)
    : models_(models), config_(config), dt_(0.0), p_meld_(0.0) {
  validate(config_);
  dt_ = config_.step_length();
  p_meld_ = config_.meld_step_probability();
  double total = 0.0;
  for (ClassId id : enumerate_classes()) total += config_.arrival_probability[id.index()];
  double running = 0.0;
  for (ClassId id : enumerate_classes()) {
    const double p = config_.arrival_probability[id.index()];
    if (p <= 0.0) continue;
    running += p / total;
    arrival_class_.push_back(id);
    arrival_cdf_.push_back(running);
  }
  arrival_cdf_.back() = 1.0;
}

std::optional<Item> Engine::incoming(SimState& state, Phase phase, double shortage, RandomStream& rng) const {
  const double u_class = rng.uniform();
  const auto pos = std::upper_bound(arrival_cdf_.begin(), arrival_cdf_.end(), u_class);
  ClassId cls = arrival_class_[std::min<std::size_t>(pos - arrival_cdf_.begin(), arrival_class_.size() - 1)];

  Item item;
  item.arrival_time = now(state);

  if (cls.is_donor()) {
    const double u_thin = rng.uniform();
    if (u_thin < shortage) return std::nullopt;
    item.cls = cls;
    item.initial_class = cls;
    item.id = phase == Phase::Study ? state.next_incident_id++ : state.next_prevalent_id--;
    return item;
  }

  const double u_flag = rng.uniform();
  if (u_flag < config_.awaits_probability[cls.index()]) cls = with_awaiting(cls);
  item.cls = cls;
  item.initial_class = cls;
  item.id = phase == Phase::Study ? state.next_incident_id++ : state.next_prevalent_id--;
  item.waiting_time = 0.0;

  const RecipientClass& rc = cls.recipient_class();
  if (rc.awaits_mxp) {
    const Years grant = sample_mxp_grant_time(models_.grant(), rc, rng.uniform_open());
    item.mxp_timer = grant;
    // One step of margin: the grant is processed no later than the step in
    // which the timer reaches zero, strictly before the death check could fire.
    item.real_patience = sample_patience_conditioned_above(models_.real_law(cls), grant + dt_, rng.uniform_open());
    item.predictive_patience =
        sample_patience_conditioned_above(models_.predictive_law(cls), grant, rng.uniform_open(), dt_);
  } else {
    item.mxp_timer = kNoMxpTimer;
    item.real_patience = sample_patience(models_.real_law(cls), rng.uniform_open());
    item.predictive_patience = sample_patience(models_.predictive_law(cls), rng.uniform_open());
  }
  return item;
}

void Engine::record(std::vector<FateRecord>* ledger, const Item& item, Outcome outcome, Years at) const {
  if (ledger == nullptr) return;
  const Years window_end = static_cast<double>(config_.steps_for(config_.incident_window_years)) * dt_;
  FateRecord r;
  r.id = item.id;
  r.initial_class = item.initial_class;
  r.outcome = outcome;
  r.arrival_time = item.arrival_time;
  r.time_in_system = at - std::max(item.arrival_time, 0.0);
  r.prevalent = item.id < 0;
  r.incident = !r.prevalent && item.arrival_time >= 0.0 && item.arrival_time < window_end;
  ledger->push_back(r);
}

void Engine::grant_mxp(Item& item, RandomStream& rng) const {
  if (!item.cls.is_recipient() || !item.cls.recipient_class().awaits_mxp || !mxp_timer_due(item.mxp_timer)) {
    throw std::logic_error("grant_mxp: item is not due for a MELD exception");
  }
  const RecipientClass& rc = item.cls.recipient_class();
  const ClassId target = ClassId::recipient({Indication::Mxp, rc.meld, false});
  const Years c = item.waiting_time;
  item.cls = target;
  item.initial_class = target;
  item.real_patience = sample_conditional_shifted(models_.real_law(target), c, rng.uniform_open());
  item.predictive_patience = sample_patience(models_.predictive_law(target), rng.uniform_open());
  item.waiting_time = 0.0;
  item.mxp_timer = kNoMxpTimer;
}

std::optional<MeldMove> Engine::maybe_remeld(Item& item, RandomStream& rng) const {
  if (!item.cls.is_recipient()) return std::nullopt;
  const MeldMoves& moves = models_.transitions().moves(item.cls);
  if (!moves.eligible()) return std::nullopt;
  if (!rng.bernoulli(p_meld_)) return std::nullopt;

  const bool up = rng.uniform() < moves.up_probability;
  const std::vector<Destination>& dests = up ? moves.up : moves.down;
  const double u = rng.uniform();
  double running = 0.0;
  ClassId to = dests.back().to;
  for (const Destination& d : dests) {
    running += d.probability;
    if (u < running) {
      to = d.to;
      break;
    }
  }
  const MeldMove move{item.id, item.cls, to};
  const Years c = item.waiting_time;
  item.cls = to;
  item.real_patience = sample_conditional_shifted(models_.real_law(to), c, rng.uniform_open());
  item.predictive_patience = sample_conditional_shifted(models_.predictive_law(to), c, rng.uniform_open(), dt_);
  return move;
}

void Engine::actualize(SimState& state, RandomStream& rng, StepEvents& events, PhaseTally& tally,
                       std::vector<FateRecord>* ledger) const {
  QueueState& q = state.queue;
  const Years t = now(state);
  std::size_t keep = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    Item& it = q[i];
    it.waiting_time += dt_;
    it.real_patience -= dt_;
    it.predictive_patience -= dt_;
    it.mxp_timer -= dt_;

    bool gone = it.real_patience <= 0.0;
    if (!gone) {
      if (it.predictive_patience < 0.0) {
        it.predictive_patience = sample_conditional_shifted(models_.predictive_law(it.cls), it.waiting_time,
                                                            rng.uniform_open(), dt_);
        events.predictive_redraws.push_back(it.id);
        ++tally.predictive_redraws;
      }
      if (mxp_timer_due(it.mxp_timer) && it.cls.recipient_class().awaits_mxp) {
        grant_mxp(it, rng);
        events.mxp_grants.push_back(it.id);
        ++tally.mxp_grants;
      }
      if (auto move = maybe_remeld(it, rng)) {
        events.meld_moves.push_back(*move);
        ++tally.meld_moves;
      }
      // A redraw can return a zero residual; that item reneges now.
      gone = it.real_patience <= 0.0;
    }
    if (gone) {
      events.reneged.push_back(it.id);
      ++tally.renegings;
      record(ledger, it, Outcome::Deceased, t);
      continue;
    }
    if (keep != i) q[keep] = it;
    ++keep;
  }
  q.resize(keep);
}

void Engine::step(SimState& state, Phase phase, PolicyKind policy, double shortage, Streams& streams,
                  StepEvents& events, PhaseTally& tally, std::vector<FateRecord>* ledger) const {
  events.clear();
  events.step = state.clock;
  events.time = now(state);

  std::optional<Item> arrival = incoming(state, phase, shortage, streams.arrivals);
  if (arrival) {
    events.arrival_id = arrival->id;
  } else {
    events.donor_suppressed = true;
    ++tally.donors_suppressed;
  }

  actualize(state, streams.dynamics, events, tally, ledger);

  if (arrival) {
    if (arrival->cls.is_donor()) {
      ++tally.donor_arrivals;
      const auto pick =
          choose_match(policy, state.queue, *arrival, models_.compatibility(), models_.score());
      if (pick) {
        const Item& recipient = state.queue[*pick];
        events.transplants.push_back({arrival->id, recipient.id});
        ++tally.transplants;
        record(ledger, recipient, Outcome::Transplanted, events.time);
        state.queue.erase(state.queue.begin() + static_cast<std::ptrdiff_t>(*pick));
      } else {
        events.discarded.push_back(arrival->id);
        ++tally.discarded;
      }
    } else {
      ++tally.recipient_arrivals;
      state.queue.push_back(*arrival);
    }
  }
  ++state.clock;
}

PhaseResult Engine::run_phase(SimState& state, Phase phase, std::int64_t steps, PolicyKind policy,
                              double shortage, Streams& streams, const EventSink& sink) const {
  if (!(shortage >= 0.0 && shortage < 1.0)) throw std::invalid_argument("shortage fraction must lie in [0, 1)");
  PhaseResult result;
  result.tally.initial_queue = static_cast<std::int64_t>(state.queue.size());
  std::vector<FateRecord>* ledger = phase == Phase::Study ? &result.ledger : nullptr;
  StepEvents events;
  for (std::int64_t s = 0; s < steps; ++s) {
    step(state, phase, policy, shortage, streams, events, result.tally, ledger);
    if (sink && !events.empty()) sink(phase, events);
  }
  result.tally.still_waiting = static_cast<std::int64_t>(state.queue.size());
  if (ledger != nullptr) {
    const Years end = now(state);
    for (const Item& it : state.queue) record(ledger, it, Outcome::Alive, end);
  }
  if (!result.tally.balanced()) throw std::logic_error("phase bookkeeping identity violated");
  return result;
}

PhaseResult Engine::run_initiation(SimState& state, PolicyKind policy, Streams& streams,
                                   const EventSink& sink) const {
  const std::int64_t steps = config_.steps_for(config_.initiation_years);
  state.clock = -steps;
  return run_phase(state, Phase::Initiation, steps, policy, 0.0, streams, sink);
}

}  // namespace rtmatch
