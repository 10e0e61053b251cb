#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "rtmatch/engine.hpp"
#include "support.hpp"

using namespace rtmatch;
using rtmatch::test::cls;
using rtmatch::test::ks_distance;
using rtmatch::test::recipient;
using rtmatch::test::small_config;

namespace {

const RunConfig& defaults() {
  static const RunConfig c = default_run_config();
  return c;
}

const Models& default_models() {
  static const Models m = defaults().build_models();
  return m;
}

// Every arrival is of class `only`.
EngineConfig single_class_config(ClassId only) {
  EngineConfig e = defaults().engine;
  e.arrival_probability.fill(0.0);
  e.arrival_probability[only.index()] = 1.0;
  return e;
}

std::int64_t count_donor_arrivals(double shortage, std::int64_t steps) {
  const Engine engine(default_models(), defaults().engine);
  SimState state;
  RandomStream rng(99);
  std::int64_t donors = 0;
  for (std::int64_t i = 0; i < steps; ++i) {
    const auto item = engine.incoming(state, Phase::Study, shortage, rng);
    if (item && item->cls.is_donor()) ++donors;
  }
  return donors;
}

}  // namespace

TEST_CASE("engine timing") {
  const EngineConfig& e = defaults().engine;
  CHECK(e.step_length() == doctest::Approx(1.0 / 3108.0));
  CHECK(e.meld_step_probability() == doctest::Approx(1.0 - std::exp(-0.5 / 3108.0)).epsilon(1e-14));
  CHECK(e.steps_for(15.0) == 15 * 3108);
  CHECK_NOTHROW(validate(e));

  EngineConfig bad = e;
  bad.steps_per_year = 1;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = e;
  bad.arrival_probability[0] += 0.1;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = e;
  bad.arrival_probability[cls(Indication::Mxp, MeldBand::B1).index()] = 0.01;
  bad.arrival_probability[0] -= 0.01;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = e;
  bad.awaits_probability[cls(Indication::Hcc, MeldBand::B1).index()] = 0.2;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("donor thinning") {
  constexpr std::int64_t steps = 1000000;
  const double p = defaults().engine.arrival_probability[0];
  CHECK(std::abs(static_cast<double>(count_donor_arrivals(0.0, steps)) / (p * steps) - 1.0) < 0.01);
  CHECK(std::abs(static_cast<double>(count_donor_arrivals(0.5, steps)) / (0.5 * p * steps) - 1.0) < 0.01);
}

TEST_CASE("incoming recipients") {
  const Engine engine(default_models(), defaults().engine);
  SimState state;
  RandomStream rng(7);
  int awaiting = 0;
  for (int i = 0; i < 200000; ++i) {
    const auto item = engine.incoming(state, Phase::Study, 0.0, rng);
    REQUIRE(item.has_value());
    if (item->cls.is_donor()) continue;
    CHECK(item->waiting_time == 0.0);
    CHECK(item->real_patience > 0.0);
    CHECK(item->predictive_patience > 0.0);
    CHECK(item->id > 0);
    const RecipientClass& rc = item->cls.recipient_class();
    CHECK(rc.indication != Indication::Mxp);
    if (rc.awaits_mxp) {
      ++awaiting;
      REQUIRE(item->mxp_timer > 0.0);
      REQUIRE(item->real_patience > item->mxp_timer);
      REQUIRE(item->predictive_patience >= item->mxp_timer);
    } else {
      CHECK(mxp_timer_idle(item->mxp_timer));
    }
  }
  CHECK(awaiting > 0);

  SUBCASE("ids are negative during initiation") {
    SimState s;
    RandomStream r(8);
    const auto item = engine.incoming(s, Phase::Initiation, 0.0, r);
    CHECK(item->id == -1);
    CHECK(s.next_prevalent_id == -2);
  }
}

TEST_CASE("actualize") {
  const Engine engine(default_models(), defaults().engine);
  const double dt = engine.step_length();
  RandomStream rng(3);
  StepEvents events;
  PhaseTally tally;

  SUBCASE("empty queue") {
    SimState s;
    engine.actualize(s, rng, events, tally, nullptr);
    CHECK(s.queue.empty());
    CHECK(events.empty());
  }
  SUBCASE("patience running out reneges") {
    SimState s;
    s.queue.push_back(recipient(cls(Indication::Cirrh, MeldBand::B2), 0.4 * dt, 3.0, 0.0, 5));
    std::vector<FateRecord> ledger;
    engine.actualize(s, rng, events, tally, &ledger);
    CHECK(s.queue.empty());
    CHECK(events.reneged == std::vector<std::int64_t>{5});
    CHECK(tally.renegings == 1);
    REQUIRE(ledger.size() == 1);
    CHECK(ledger[0].outcome == Outcome::Deceased);
  }
  SUBCASE("elapsed predictive patience is redrawn") {
    SimState s;
    s.queue.push_back(recipient(cls(Indication::Hcc, MeldBand::B3), 5.0, 0.5 * dt, 1.0, 6));
    engine.actualize(s, rng, events, tally, nullptr);
    REQUIRE(s.queue.size() == 1);
    CHECK(s.queue[0].predictive_patience > 0.0);
    CHECK(events.predictive_redraws == std::vector<std::int64_t>{6});
    CHECK(s.queue[0].waiting_time == doctest::Approx(1.0 + dt));
    CHECK(s.queue[0].real_patience == doctest::Approx(5.0 - dt));
  }
  SUBCASE("due timer grants the exception") {
    SimState s;
    Item it = recipient(cls(Indication::Other, MeldBand::B1, true), 5.0, 5.0, 0.3, 7);
    it.mxp_timer = 0.5 * dt;
    s.queue.push_back(it);
    engine.actualize(s, rng, events, tally, nullptr);
    REQUIRE(s.queue.size() == 1);
    CHECK(s.queue[0].cls == cls(Indication::Mxp, MeldBand::B1));
    CHECK(s.queue[0].waiting_time == 0.0);
    CHECK(events.mxp_grants == std::vector<std::int64_t>{7});
  }
}

TEST_CASE("grant_mxp") {
  const Engine engine(default_models(), defaults().engine);
  RandomStream rng(13);
  Item it = recipient(cls(Indication::Cirrh, MeldBand::B2, true), 4.0, 4.0, 0.7);
  it.mxp_timer = 0.0;
  Item granted = it;
  engine.grant_mxp(granted, rng);
  CHECK(granted.cls == cls(Indication::Mxp, MeldBand::B2));
  CHECK(granted.initial_class == granted.cls);
  CHECK(granted.waiting_time == 0.0);
  CHECK(mxp_timer_idle(granted.mxp_timer));
  CHECK(default_models().compatibility().is_compatible(ClassId::donor(), granted.cls));

  Item not_due = it;
  not_due.mxp_timer = 0.2;
  CHECK_THROWS_AS(engine.grant_mxp(not_due, rng), std::logic_error);
  Item not_awaiting = recipient(cls(Indication::Cirrh, MeldBand::B2), 4.0, 4.0);
  not_awaiting.mxp_timer = 0.0;
  CHECK_THROWS_AS(engine.grant_mxp(not_awaiting, rng), std::logic_error);

  SUBCASE("real patience follows the shifted conditional MXP law") {
    // A non-exponential MXP law so that conditioning matters.
    RunConfig c = defaults();
    c.patience.strata[index_of(Indication::Mxp)] = CoxStratum{{2.0, 2.0}, {0.0, 0.3, 0.6}};
    const Models models = c.build_models();
    const Engine e(models, c.engine);
    const double age = 1.2;
    Item base = recipient(cls(Indication::Other, MeldBand::B3, true), 4.0, 4.0, age);
    base.mxp_timer = 0.0;
    std::vector<double> xs;
    for (int i = 0; i < 100000; ++i) {
      Item x = base;
      e.grant_mxp(x, rng);
      REQUIRE(x.real_patience >= 0.0);
      xs.push_back(x.real_patience);
    }
    std::mt19937_64 gen(14);
    std::weibull_distribution<double> w(2.0, 2.0 * std::exp(-0.6 / 2.0));
    std::vector<double> oracle;
    while (oracle.size() < xs.size()) {
      const double t = w(gen);
      if (t >= age) oracle.push_back(t - age);
    }
    CHECK(ks_distance(xs, oracle) < 0.015);
  }
}

TEST_CASE("maybe_remeld") {
  RunConfig c = defaults();
  c.engine.steps_per_year = 2;  // large per-step probability for a tight frequency check
  const Models models = c.build_models();
  const Engine engine(models, c.engine);
  RandomStream rng(17);

  SUBCASE("frequency matches the geometric step probability") {
    constexpr int trials = 4000000;
    int moved = 0;
    const Item base = recipient(cls(Indication::Cirrh, MeldBand::B3), 50.0, 50.0, 0.0);
    for (int i = 0; i < trials; ++i) {
      Item it = base;
      if (engine.maybe_remeld(it, rng)) ++moved;
    }
    const double p = engine.meld_step_probability();
    CHECK(std::abs(static_cast<double>(moved) / trials / p - 1.0) < 0.005);
  }
  SUBCASE("ineligible classes never move") {
    for (ClassId id : {cls(Indication::Mxp, MeldBand::B1), cls(Indication::Cirrh, MeldBand::B2, true)}) {
      for (int i = 0; i < 10000; ++i) {
        Item it = recipient(id, 1.0, 1.0);
        REQUIRE_FALSE(engine.maybe_remeld(it, rng).has_value());
        REQUIRE(it.cls == id);
      }
    }
  }
  SUBCASE("top band only moves down, waiting time is kept") {
    int moves = 0;
    for (int i = 0; i < 10000; ++i) {
      Item it = recipient(cls(Indication::Other, MeldBand::B6), 1.0, 1.0, 0.8, 3);
      if (auto m = engine.maybe_remeld(it, rng)) {
        ++moves;
        CHECK(m->to.recipient_class().meld < MeldBand::B6);
        CHECK(m->to.recipient_class().indication == Indication::Other);
        CHECK(it.waiting_time == 0.8);
        CHECK(it.initial_class == cls(Indication::Other, MeldBand::B6));
      }
    }
    CHECK(moves > 0);
  }
  SUBCASE("direction split") {
    int up = 0, total = 0;
    for (int i = 0; i < 200000; ++i) {
      Item it = recipient(cls(Indication::Hcc, MeldBand::B3), 1.0, 1.0);
      if (auto m = engine.maybe_remeld(it, rng)) {
        ++total;
        if (m->to.recipient_class().meld > MeldBand::B3) ++up;
      }
    }
    CHECK(static_cast<double>(up) / total == doctest::Approx(kDefaultUpProbability).epsilon(0.02));
  }
}

TEST_CASE("step cases") {
  StepEvents events;
  PhaseTally tally;

  SUBCASE("donor with empty queue is discarded") {
    const EngineConfig e = single_class_config(ClassId::donor());
    const Engine engine(default_models(), e);
    SimState s;
    Streams streams = Streams::for_replication(1, 0);
    engine.step(s, Phase::Study, PolicyKind::Esdf, 0.0, streams, events, tally, nullptr);
    CHECK(s.queue.empty());
    CHECK(events.discarded.size() == 1);
    CHECK(tally.discarded == 1);
    CHECK(s.clock == 1);
  }
  SUBCASE("donor with one compatible recipient transplants it") {
    const Engine engine(default_models(), single_class_config(ClassId::donor()));
    SimState s;
    s.queue.push_back(recipient(cls(Indication::Cirrh, MeldBand::B1, true), 9.0, 9.0, 0.0, -4));
    s.queue.back().mxp_timer = 5.0;
    s.queue.push_back(recipient(cls(Indication::Hcc, MeldBand::B5), 9.0, 9.0, 0.0, -3));
    Streams streams = Streams::for_replication(1, 0);
    std::vector<FateRecord> ledger;
    engine.step(s, Phase::Study, PolicyKind::Score, 0.0, streams, events, tally, &ledger);
    REQUIRE(events.transplants.size() == 1);
    CHECK(events.transplants[0].recipient_id == -3);
    REQUIRE(s.queue.size() == 1);
    CHECK(s.queue[0].id == -4);
    REQUIRE(ledger.size() == 1);
    CHECK(ledger[0].outcome == Outcome::Transplanted);
    CHECK(ledger[0].prevalent);
  }
  SUBCASE("recipient joins the tail") {
    const Engine engine(default_models(), single_class_config(cls(Indication::Hcc, MeldBand::B2)));
    SimState s;
    s.queue.push_back(recipient(cls(Indication::Cirrh, MeldBand::B1), 9.0, 9.0, 0.0, -1));
    Streams streams = Streams::for_replication(1, 0);
    engine.step(s, Phase::Study, PolicyKind::Edf, 0.0, streams, events, tally, nullptr);
    REQUIRE(s.queue.size() == 2);
    CHECK(s.queue[1].id == 1);
    CHECK(s.queue[1].cls == cls(Indication::Hcc, MeldBand::B2));
  }
}

TEST_CASE("phases") {
  const RunConfig c = small_config();
  const Models models = c.build_models();
  const Engine engine(models, c.engine);

  SUBCASE("zero steps") {
    SimState s;
    s.queue.push_back(recipient(cls(Indication::Cirrh, MeldBand::B1), 9.0, 9.0));
    Streams streams = Streams::for_replication(1, 0);
    const PhaseResult r = engine.run_phase(s, Phase::Initiation, 0, PolicyKind::Esdf, 0.0, streams);
    CHECK(s.queue.size() == 1);
    CHECK(r.ledger.empty());
  }
  SUBCASE("shortage out of range") {
    SimState s;
    Streams streams = Streams::for_replication(1, 0);
    CHECK_THROWS_AS(engine.run_phase(s, Phase::Study, 10, PolicyKind::Esdf, 1.0, streams), std::invalid_argument);
  }
  SUBCASE("initiation then study") {
    for (PolicyKind policy : kPolicyKinds) {
      SimState s;
      Streams streams = Streams::for_replication(5, 2);
      const PhaseResult init = engine.run_initiation(s, policy, streams);
      CHECK(s.clock == 0);
      CHECK(init.ledger.empty());
      CHECK(init.tally.balanced());
      CHECK(init.tally.donors_suppressed == 0);
      CHECK_FALSE(s.queue.empty());
      for (const Item& it : s.queue) CHECK(it.id < 0);

      const std::size_t prevalent = s.queue.size();
      const PhaseResult study =
          engine.run_phase(s, Phase::Study, c.engine.steps_for(c.engine.study_years), policy, 0.3, streams);
      CHECK(study.tally.balanced());
      CHECK(study.tally.donors_suppressed > 0);
      CHECK(study.ledger.size() == prevalent + static_cast<std::size_t>(study.tally.recipient_arrivals));
      for (const FateRecord& f : study.ledger) {
        CHECK_FALSE((f.incident && f.prevalent));
        CHECK(f.prevalent == (f.id < 0));
        CHECK(f.time_in_system >= 0.0);
        if (f.initial_class.recipient_class().awaits_mxp) CHECK(f.outcome == Outcome::Alive);
      }
    }
  }
}

TEST_CASE("per-step invariants") {
  const RunConfig c = small_config();
  const Models models = c.build_models();
  const Engine engine(models, c.engine);
  SimState s;
  Streams streams = Streams::for_replication(77, 0);
  engine.run_initiation(s, PolicyKind::Esdf, streams);

  StepEvents events;
  PhaseTally tally;
  tally.initial_queue = static_cast<std::int64_t>(s.queue.size());
  std::vector<FateRecord> ledger;
  for (int i = 0; i < 3000; ++i) {
    engine.step(s, Phase::Study, PolicyKind::Esdf, 0.15, streams, events, tally, &ledger);
    for (std::size_t k = 0; k < s.queue.size(); ++k) {
      REQUIRE(s.queue[k].real_patience > 0.0);
      REQUIRE(s.queue[k].waiting_time >= 0.0);
      if (k > 0) REQUIRE(s.queue[k - 1].arrival_time <= s.queue[k].arrival_time);
    }
    for (const Transplant& t : events.transplants) {
      for (std::int64_t r : events.reneged) REQUIRE(r != t.recipient_id);
    }
  }
  tally.still_waiting = static_cast<std::int64_t>(s.queue.size());
  CHECK(tally.balanced());
}

TEST_CASE("determinism and policy-independent arrival streams") {
  const RunConfig c = small_config(2.0, 1.0);
  const Models models = c.build_models();
  const Engine engine(models, c.engine);
  const auto steps = c.engine.steps_for(c.engine.study_years);

  auto run = [&](PolicyKind policy, std::uint64_t seed) {
    SimState s;
    Streams streams = Streams::for_replication(seed, 3);
    engine.run_initiation(s, policy, streams);
    PhaseResult r = engine.run_phase(s, Phase::Study, steps, policy, 0.15, streams);
    return std::pair{r.ledger, streams.arrivals};
  };
  const auto a = run(PolicyKind::Esdf, 4);
  const auto b = run(PolicyKind::Esdf, 4);
  CHECK(a.first == b.first);
  CHECK(a.first != run(PolicyKind::Esdf, 5).first);
  CHECK(run(PolicyKind::Score, 4).second == a.second);
  CHECK(run(PolicyKind::Edf, 4).second == a.second);
}
