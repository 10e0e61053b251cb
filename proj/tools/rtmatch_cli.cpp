// rtmatch: run the policy x shortage scenario matrix and write result files.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtmatch/config.hpp"
#include "rtmatch/output.hpp"
#include "rtmatch/scenarios.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2, kOutputError = 3 };

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& flag) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw rtmatch::ConfigError(flag, "not a number: '" + s + "'");
  }
  return v;
}

std::string fmt_rate(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

nlohmann::json event_json(rtmatch::Phase phase, const rtmatch::StepEvents& ev) {
  nlohmann::json j{{"phase", phase == rtmatch::Phase::Initiation ? "initiation" : "study"},
                   {"step", ev.step},
                   {"time", ev.time}};
  if (ev.arrival_id) j["arrival"] = *ev.arrival_id;
  if (ev.donor_suppressed) j["donor_suppressed"] = true;
  if (!ev.reneged.empty()) j["reneged"] = ev.reneged;
  if (!ev.transplants.empty()) {
    auto& t = j["transplants"] = nlohmann::json::array();
    for (const auto& x : ev.transplants) t.push_back({x.donor_id, x.recipient_id});
  }
  if (!ev.discarded.empty()) j["discarded"] = ev.discarded;
  if (!ev.mxp_grants.empty()) j["mxp_grants"] = ev.mxp_grants;
  if (!ev.meld_moves.empty()) {
    auto& m = j["meld_moves"] = nlohmann::json::array();
    for (const auto& x : ev.meld_moves) m.push_back({x.id, rtmatch::to_string(x.from), rtmatch::to_string(x.to)});
  }
  if (!ev.predictive_redraws.empty()) j["predictive_redraws"] = ev.predictive_redraws;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Liver-allocation matching queue simulator"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> policies;
  std::optional<std::string> shortage;
  std::optional<int> replications;
  unsigned threads = 0;
  bool quiet = false;
  bool verbose = false;
  bool emit_events = false;
  bool print_config = false;

  app.add_option("--config", config_path, "Scenario config file (JSON)")->required();
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--policies", policies, "Comma-separated policies: EDF, ESDF, SCORE");
  app.add_option("--shortage", shortage, "Comma-separated shortage levels in [0,1)");
  app.add_option("--replications", replications, "Replications per scenario");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  auto* q = app.add_flag("--quiet", quiet, "Print nothing on success");
  app.add_flag("--verbose", verbose, "Report progress per replication")->excludes(q);
  app.add_flag("--emit-events", emit_events, "Write per-step NDJSON event logs under <out>/events");
  app.add_flag("--print-config", print_config, "Print the fully resolved config as JSON and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  rtmatch::RunConfig config;
  try {
    config = rtmatch::parse_config(config_path);
    if (seed) config.seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    if (replications) config.replications = *replications;
    if (policies) {
      config.policies.clear();
      for (const auto& p : split_list(*policies)) {
        const auto kind = rtmatch::parse_policy(p);
        if (!kind) throw rtmatch::ConfigError("--policies", "unknown policy '" + p + "'");
        config.policies.push_back(*kind);
      }
    }
    if (shortage) {
      config.shortage_levels.clear();
      for (const auto& s : split_list(*shortage)) config.shortage_levels.push_back(parse_double(s, "--shortage"));
    }
    config.validate();
    if (print_config) {
      std::cout << rtmatch::to_json(config).dump(2) << "\n";
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  const std::filesystem::path out = config.output_dir;
  std::vector<rtmatch::ScenarioResult> results;
  try {
    const rtmatch::Models models = config.build_models();
    const auto specs = config.scenarios();
    rtmatch::RunOptions options;
    options.threads = threads;
    std::mutex io;
    if (verbose) {
      options.on_unit_done = [&io](const std::string& label, int rep) {
        std::lock_guard lock(io);
        std::cerr << "done " << label << " replication " << rep << "\n";
      };
    }
    if (emit_events) {
      std::filesystem::create_directories(out / "events");
      options.event_sink = [&out](const std::string& label, int rep) -> rtmatch::EventSink {
        const auto path = out / "events" / (label + "_r" + std::to_string(rep) + ".ndjson");
        auto file = std::make_shared<std::ofstream>(path, std::ios::binary | std::ios::trunc);
        if (!*file) throw rtmatch::OutputError("cannot open " + path.string());
        return [file](rtmatch::Phase phase, const rtmatch::StepEvents& ev) {
          *file << event_json(phase, ev).dump() << '\n';
        };
      };
    }
    results = rtmatch::run_scenarios(specs, config.engine, models, options);
  } catch (const rtmatch::OutputError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kOutputError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kOutputError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }

  try {
    rtmatch::ResultsDocument doc{rtmatch::config_hash(config), config.seed, results};
    rtmatch::emit_results(doc, out);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kOutputError;
  }

  if (!quiet) {
    for (const auto& r : results) {
      const auto& all = r.incident[rtmatch::kOverall];
      std::string var = "NA";
      try {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.5f", rtmatch::ddts_variance(r));
        var = buf;
      } catch (const std::domain_error&) {
      }
      std::cout << r.spec.label() << "  DDTS " << fmt_rate(all.ddts) << "  LTx " << fmt_rate(all.ltx) << "  alive "
                << fmt_rate(all.alive) << "  var " << var << "  cohort " << static_cast<long>(r.cohort_total_mean + 0.5)
                << "\n";
    }
    std::cout << "wrote " << out.string() << "\n";
  }
  return kOk;
}
