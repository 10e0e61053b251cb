#include <benchmark/benchmark.h>

#include "rtmatch/config.hpp"
#include "rtmatch/engine.hpp"
#include "rtmatch/policies.hpp"
#include "rtmatch/rng.hpp"
#include "rtmatch/survival.hpp"

namespace {

using namespace rtmatch;

const RunConfig& config() {
  static const RunConfig c = default_run_config();
  return c;
}

const Models& models() {
  static const Models m = config().build_models();
  return m;
}

// A queue in the state left by the initiation phase.
SimState warm_state(PolicyKind policy) {
  static const Engine engine(models(), config().engine);
  SimState s;
  Streams streams = Streams::for_replication(1, 0);
  engine.run_initiation(s, policy, streams);
  return s;
}

void BM_EngineStep(benchmark::State& state) {
  const auto policy = static_cast<PolicyKind>(state.range(0));
  const Engine engine(models(), config().engine);
  SimState s = warm_state(policy);
  Streams streams = Streams::for_replication(2, 0);
  StepEvents events;
  PhaseTally tally;
  for (auto _ : state) {
    engine.step(s, Phase::Study, policy, 0.3, streams, events, tally, nullptr);
  }
  state.counters["queue"] = static_cast<double>(s.queue.size());
}
BENCHMARK(BM_EngineStep)->Arg(0)->Arg(1)->Arg(2);

void BM_ChooseMatch(benchmark::State& state) {
  const auto policy = static_cast<PolicyKind>(state.range(0));
  const SimState s = warm_state(policy);
  Item donor;
  donor.cls = ClassId::donor();
  for (auto _ : state) {
    benchmark::DoNotOptimize(choose_match(policy, s.queue, donor, models().compatibility(), models().score()));
  }
  state.counters["queue"] = static_cast<double>(s.queue.size());
}
BENCHMARK(BM_ChooseMatch)->Arg(0)->Arg(1)->Arg(2);

void BM_SampleCox(benchmark::State& state) {
  const PatienceLaw law = config().patience.law(Indication::Cirrh, MeldBand::B4);
  RandomStream rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_patience(law, rng.uniform_open()));
}
BENCHMARK(BM_SampleCox);

void BM_SampleCoxConditional(benchmark::State& state) {
  const PatienceLaw law = config().patience.law(Indication::Hcc, MeldBand::B2);
  RandomStream rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(sample_conditional_shifted(law, 1.5, rng.uniform_open()));
}
BENCHMARK(BM_SampleCoxConditional);

void BM_SampleTableConditional(benchmark::State& state) {
  const PatienceLaw law = models().mxp_predictive();
  RandomStream rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample_conditional_shifted(law, 0.8, rng.uniform_open(), 1e-3));
}
BENCHMARK(BM_SampleTableConditional);

}  // namespace

BENCHMARK_MAIN();
