#include "rtmatch/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace rtmatch {

namespace {

Stratum stratum_at(std::size_t s, Cohort cohort) {
  Stratum st;
  st.cohort = cohort;
  if (s < kIndicationCount) st.indication = kIndications[s];
  return st;
}

struct Group {
  PolicyKind policy;
  std::uint64_t seed;
  int replications;
  std::vector<std::size_t> specs;  // indices into the spec list
};

// Running mean over the replications where a value is defined.
struct MeanOf {
  double sum = 0.0;
  int n = 0;
  void add(std::optional<double> v) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  std::optional<double> get() const {
    if (n == 0) return std::nullopt;
    return sum / n;
  }
};

}  // namespace

std::string ScenarioSpec::label() const {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, shortage, std::chars_format::fixed, 2);
  (void)ec;
  return std::string(to_string(policy)) + "_s" + std::string(buf, end);
}

std::string_view stratum_name(std::size_t stratum) {
  return stratum < kIndicationCount ? to_string(kIndications[stratum]) : std::string_view("ALL");
}

double ddts_variance(const ScenarioResult& result) {
  std::array<double, 3> rates{};
  for (std::size_t k = 0; k < kEquityIndications.size(); ++k) {
    const auto& r = result.incident[index_of(kEquityIndications[k])].ddts;
    if (!r) {
      throw std::domain_error("DDTS rate undefined for " + std::string(to_string(kEquityIndications[k])));
    }
    rates[k] = *r;
  }
  return ddts_variance(rates);
}

ReplicationSummary summarise_replication(int replication, std::span<const FateRecord> ledger,
                                         const PhaseTally& study_tally, std::int64_t initial_queue) {
  ReplicationSummary s;
  s.replication = replication;
  for (std::size_t k = 0; k < kStrataCount; ++k) {
    s.incident[k] = count_outcomes(ledger, stratum_at(k, Cohort::Incident));
    s.prevalent[k] = count_outcomes(ledger, stratum_at(k, Cohort::Prevalent));
  }
  s.cohort = incident_cohort_counts(ledger);
  s.study = study_tally;
  s.initial_queue = initial_queue;
  return s;
}

ScenarioResult aggregate(const ScenarioSpec& spec, std::span<const ReplicationSummary> replications) {
  if (replications.empty()) throw std::invalid_argument("aggregate: no replications");
  ScenarioResult out;
  out.spec = spec;
  const double n = static_cast<double>(replications.size());

  std::array<std::array<MeanOf, 3>, kStrataCount> inc{}, prev{};
  MeanOf variance;
  for (const ReplicationSummary& r : replications) {
    for (std::size_t i = 0; i < kIndicationCount; ++i) {
      for (std::size_t b = 0; b < kMeldBandCount; ++b) out.cohort_mean[i][b] += r.cohort[i][b] / n;
    }
    out.cohort_total_mean += static_cast<double>(r.incident[kOverall].cohort) / n;
    for (std::size_t k = 0; k < kStrataCount; ++k) {
      out.incident[k].mean_cohort += static_cast<double>(r.incident[k].cohort) / n;
      out.prevalent[k].mean_cohort += static_cast<double>(r.prevalent[k].cohort) / n;
      const auto ri = crude_rates(r.incident[k]);
      const auto rp = crude_rates(r.prevalent[k]);
      inc[k][0].add(ri ? std::optional(ri->ddts) : std::nullopt);
      inc[k][1].add(ri ? std::optional(ri->ltx) : std::nullopt);
      inc[k][2].add(ri ? std::optional(ri->alive) : std::nullopt);
      prev[k][0].add(rp ? std::optional(rp->ddts) : std::nullopt);
      prev[k][1].add(rp ? std::optional(rp->ltx) : std::nullopt);
      prev[k][2].add(rp ? std::optional(rp->alive) : std::nullopt);
    }
    std::array<double, 3> rates{};
    bool defined = true;
    for (std::size_t k = 0; k < kEquityIndications.size(); ++k) {
      const auto rr = crude_rates(r.incident[index_of(kEquityIndications[k])]);
      if (!rr) {
        defined = false;
        break;
      }
      rates[k] = rr->ddts;
    }
    variance.add(defined ? std::optional(ddts_variance(rates)) : std::nullopt);
    out.mean_initial_queue += static_cast<double>(r.initial_queue) / n;
    out.mean_transplants += static_cast<double>(r.study.transplants) / n;
    out.mean_renegings += static_cast<double>(r.study.renegings) / n;
    out.mean_discarded += static_cast<double>(r.study.discarded) / n;
    out.mean_donor_arrivals += static_cast<double>(r.study.donor_arrivals) / n;
  }
  for (std::size_t k = 0; k < kStrataCount; ++k) {
    out.incident[k].ddts = inc[k][0].get();
    out.incident[k].ltx = inc[k][1].get();
    out.incident[k].alive = inc[k][2].get();
    out.prevalent[k].ddts = prev[k][0].get();
    out.prevalent[k].ltx = prev[k][1].get();
    out.prevalent[k].alive = prev[k][2].get();
  }
  out.mean_replication_ddts_variance = variance.get();
  return out;
}

std::vector<ScenarioResult> run_scenarios(std::span<const ScenarioSpec> specs, const EngineConfig& config,
                                          const Models& models, const RunOptions& options) {
  for (const ScenarioSpec& s : specs) {
    if (s.replications < 1) throw std::invalid_argument("scenario replications must be >= 1");
    if (!(s.shortage >= 0.0 && s.shortage < 1.0)) {
      throw std::invalid_argument("scenario shortage must lie in [0, 1)");
    }
  }
  const Engine engine(models, config);

  std::vector<Group> groups;
  {
    std::map<std::tuple<int, std::uint64_t, int>, std::size_t> index;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto key = std::make_tuple(static_cast<int>(specs[i].policy), specs[i].seed, specs[i].replications);
      auto [it, inserted] = index.try_emplace(key, groups.size());
      if (inserted) groups.push_back({specs[i].policy, specs[i].seed, specs[i].replications, {}});
      groups[it->second].specs.push_back(i);
    }
  }

  struct Unit {
    std::size_t group;
    int replication;
  };
  std::vector<Unit> units;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int r = 0; r < groups[g].replications; ++r) units.push_back({g, r});
  }

  // summaries[spec][replication]
  std::vector<std::vector<ReplicationSummary>> summaries(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    summaries[i].resize(static_cast<std::size_t>(specs[i].replications));
  }

  const std::int64_t study_steps = config.steps_for(config.study_years);
  auto run_unit = [&](const Unit& u) {
    const Group& g = groups[u.group];
    SimState base_state;
    Streams base_streams = Streams::for_replication(g.seed, static_cast<std::uint64_t>(u.replication));
    EventSink init_sink;
    if (options.event_sink) {
      init_sink = options.event_sink(std::string(to_string(g.policy)) + "_initiation", u.replication);
    }
    engine.run_initiation(base_state, g.policy, base_streams, init_sink);
    const std::int64_t initial_queue = static_cast<std::int64_t>(base_state.queue.size());

    for (std::size_t si : g.specs) {
      const ScenarioSpec& spec = specs[si];
      SimState state = base_state;
      Streams streams = base_streams;
      EventSink sink;
      if (options.event_sink) sink = options.event_sink(spec.label(), u.replication);
      const PhaseResult study =
          engine.run_phase(state, Phase::Study, study_steps, spec.policy, spec.shortage, streams, sink);
      summaries[si][static_cast<std::size_t>(u.replication)] =
          summarise_replication(u.replication, study.ledger, study.tally, initial_queue);
    }
    if (options.on_unit_done) options.on_unit_done(std::string(to_string(g.policy)), u.replication);
  };

  unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(units.size(), 1)));

  if (threads <= 1) {
    for (const Unit& u : units) run_unit(u);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < units.size(); i = next++) {
          try {
            run_unit(units[i]);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<ScenarioResult> results;
  results.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) results.push_back(aggregate(specs[i], summaries[i]));
  return results;
}

}  // namespace rtmatch
