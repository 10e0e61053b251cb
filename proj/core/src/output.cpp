#include "rtmatch/output.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <system_error>

#include "rtmatch/svg_chart.hpp"

namespace rtmatch {

using nlohmann::json;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

json stratum_json(const StratumSummary& s) {
  return json{{"ddts", optional_json(s.ddts)},
              {"ltx", optional_json(s.ltx)},
              {"alive", optional_json(s.alive)},
              {"mean_cohort", s.mean_cohort}};
}

StratumSummary stratum_from(const json& j) {
  StratumSummary s;
  s.ddts = optional_from(j, "ddts");
  s.ltx = optional_from(j, "ltx");
  s.alive = optional_from(j, "alive");
  s.mean_cohort = j.at("mean_cohort").get<double>();
  return s;
}

std::string shortage_label(double s) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, s * 100.0, std::chars_format::fixed, 0);
  (void)ec;
  return std::string(buf, end) + "%";
}

std::string strata_csv(const std::vector<ScenarioResult>& results, bool prevalent) {
  std::string out = "policy,shortage,indication,mean_cohort,ddts,ltx,alive\n";
  for (const ScenarioResult& r : results) {
    const auto& strata = prevalent ? r.prevalent : r.incident;
    for (std::size_t k = 0; k < kStrataCount; ++k) {
      const StratumSummary& s = strata[k];
      out += std::string(to_string(r.spec.policy)) + "," + format_number(r.spec.shortage) + "," +
             std::string(stratum_name(k)) + "," + format_number(s.mean_cohort) + "," + format_number(s.ddts) +
             "," + format_number(s.ltx) + "," + format_number(s.alive) + "\n";
    }
  }
  return out;
}

// Distinct values in first-seen order.
template <typename T>
std::vector<T> distinct(const std::vector<ScenarioResult>& results, T ScenarioSpec::*field) {
  std::vector<T> out;
  for (const auto& r : results) {
    const T v = r.spec.*field;
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

const ScenarioResult* find(const std::vector<ScenarioResult>& results, PolicyKind p, double s) {
  for (const auto& r : results) {
    if (r.spec.policy == p && r.spec.shortage == s) return &r;
  }
  return nullptr;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw OutputError("failed writing " + path.string());
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); }

json results_to_json(const ResultsDocument& doc) {
  json scenarios = json::array();
  for (const ScenarioResult& r : doc.scenarios) {
    json cohort;
    for (Indication ind : kIndications) cohort[std::string(to_string(ind))] = r.cohort_mean[index_of(ind)];
    json incident;
    json prevalent;
    for (std::size_t k = 0; k < kStrataCount; ++k) {
      incident[std::string(stratum_name(k))] = stratum_json(r.incident[k]);
      prevalent[std::string(stratum_name(k))] = stratum_json(r.prevalent[k]);
    }
    std::optional<double> variance;
    try {
      variance = ddts_variance(r);
    } catch (const std::domain_error&) {
    }
    scenarios.push_back(json{{"label", r.spec.label()},
                             {"policy", std::string(to_string(r.spec.policy))},
                             {"shortage", r.spec.shortage},
                             {"replications", r.spec.replications},
                             {"seed", r.spec.seed},
                             {"cohort_mean", cohort},
                             {"cohort_total_mean", r.cohort_total_mean},
                             {"incident", incident},
                             {"prevalent", prevalent},
                             {"ddts_variance", optional_json(variance)},
                             {"mean_replication_ddts_variance", optional_json(r.mean_replication_ddts_variance)},
                             {"mean_initial_queue", r.mean_initial_queue},
                             {"mean_transplants", r.mean_transplants},
                             {"mean_renegings", r.mean_renegings},
                             {"mean_discarded", r.mean_discarded},
                             {"mean_donor_arrivals", r.mean_donor_arrivals}});
  }
  return json{{"config_hash", doc.config_hash}, {"seed", doc.seed}, {"scenarios", scenarios}};
}

ResultsDocument results_from_json(const json& j) {
  try {
    ResultsDocument doc;
    doc.config_hash = j.at("config_hash").get<std::uint64_t>();
    doc.seed = j.at("seed").get<std::uint64_t>();
    for (const json& s : j.at("scenarios")) {
      ScenarioResult r;
      const auto policy = parse_policy(s.at("policy").get<std::string>());
      if (!policy) throw OutputError("unknown policy in results");
      r.spec.policy = *policy;
      r.spec.shortage = s.at("shortage").get<double>();
      r.spec.replications = s.at("replications").get<int>();
      r.spec.seed = s.at("seed").get<std::uint64_t>();
      for (Indication ind : kIndications) {
        r.cohort_mean[index_of(ind)] =
            s.at("cohort_mean").at(std::string(to_string(ind))).get<std::array<double, kMeldBandCount>>();
      }
      r.cohort_total_mean = s.at("cohort_total_mean").get<double>();
      for (std::size_t k = 0; k < kStrataCount; ++k) {
        r.incident[k] = stratum_from(s.at("incident").at(std::string(stratum_name(k))));
        r.prevalent[k] = stratum_from(s.at("prevalent").at(std::string(stratum_name(k))));
      }
      r.mean_replication_ddts_variance = optional_from(s, "mean_replication_ddts_variance");
      r.mean_initial_queue = s.at("mean_initial_queue").get<double>();
      r.mean_transplants = s.at("mean_transplants").get<double>();
      r.mean_renegings = s.at("mean_renegings").get<double>();
      r.mean_discarded = s.at("mean_discarded").get<double>();
      r.mean_donor_arrivals = s.at("mean_donor_arrivals").get<double>();
      doc.scenarios.push_back(r);
    }
    return doc;
  } catch (const json::exception& e) {
    throw OutputError(std::string("malformed results document: ") + e.what());
  }
}

std::string cohort_csv(const std::vector<ScenarioResult>& results) {
  std::string out = "group,indication,meld";
  for (const auto& r : results) out += "," + r.spec.label();
  out += "\n";

  auto row = [&](const std::string& group, const std::string& ind, const std::string& meld, auto value_of) {
    out += group + "," + ind + "," + meld;
    for (const auto& r : results) out += "," + format_number(value_of(r));
    out += "\n";
  };

  for (Indication ind : kIndications) {
    row("indication", std::string(to_string(ind)), "all", [ind](const ScenarioResult& r) {
      double total = 0.0;
      for (double v : r.cohort_mean[index_of(ind)]) total += v;
      return total;
    });
  }
  for (MeldBand band : kMeldBands) {
    row("meld", "all", meld_label(band), [band](const ScenarioResult& r) {
      double total = 0.0;
      for (Indication ind : kIndications) total += r.cohort_mean[index_of(ind)][index_of(band)];
      return total;
    });
  }
  for (Indication ind : kIndications) {
    for (MeldBand band : kMeldBands) {
      if (ind == Indication::Mxp && band > MeldBand::B3) continue;
      row("detail", std::string(to_string(ind)), meld_label(band),
          [ind, band](const ScenarioResult& r) { return r.cohort_mean[index_of(ind)][index_of(band)]; });
    }
  }
  row("total", "all", "all", [](const ScenarioResult& r) { return r.cohort_total_mean; });
  return out;
}

std::string rates_csv(const std::vector<ScenarioResult>& results) { return strata_csv(results, false); }

std::string prevalent_csv(const std::vector<ScenarioResult>& results) { return strata_csv(results, true); }

std::string variance_csv(const std::vector<ScenarioResult>& results) {
  std::string out = "policy,shortage,ddts_variance,mean_replication_ddts_variance\n";
  for (const ScenarioResult& r : results) {
    std::optional<double> v;
    try {
      v = ddts_variance(r);
    } catch (const std::domain_error&) {
    }
    out += std::string(to_string(r.spec.policy)) + "," + format_number(r.spec.shortage) + "," + format_number(v) +
           "," + format_number(r.mean_replication_ddts_variance) + "\n";
  }
  return out;
}

std::string rates_figure_svg(const std::vector<ScenarioResult>& results) {
  const auto policies = distinct(results, &ScenarioSpec::policy);
  const auto levels = distinct(results, &ScenarioSpec::shortage);
  std::vector<std::string> groups;
  for (double s : levels) groups.push_back(shortage_label(s));

  std::vector<BarPanel> panels;
  for (int outcome = 0; outcome < 2; ++outcome) {
    for (std::size_t k : {kOverall, std::size_t{0}, std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
      BarPanel p;
      p.title = std::string(outcome == 0 ? "DDTS" : "LTx") + " - " + std::string(stratum_name(k));
      p.y_label = outcome == 0 ? "DDTS rate" : "LTx rate";
      p.groups = groups;
      p.y_max = 1.0;
      for (PolicyKind pol : policies) {
        BarSeries s{std::string(to_string(pol)), {}};
        for (double lvl : levels) {
          const ScenarioResult* r = find(results, pol, lvl);
          s.values.push_back(r ? (outcome == 0 ? r->incident[k].ddts : r->incident[k].ltx) : std::nullopt);
        }
        p.series.push_back(std::move(s));
      }
      panels.push_back(std::move(p));
    }
  }
  return render_bar_panels(panels, 5, "DDTS and LTx rates by organ shortage level and matching policy");
}

std::string variance_figure_svg(const std::vector<ScenarioResult>& results) {
  const auto policies = distinct(results, &ScenarioSpec::policy);
  const auto levels = distinct(results, &ScenarioSpec::shortage);
  BarPanel p;
  p.title = "CIRRH / HCC / OTHER";
  p.y_label = "variance of DDTS rate";
  for (double s : levels) p.groups.push_back(shortage_label(s));
  for (PolicyKind pol : policies) {
    BarSeries s{std::string(to_string(pol)), {}};
    for (double lvl : levels) {
      const ScenarioResult* r = find(results, pol, lvl);
      std::optional<double> v;
      if (r) {
        try {
          v = ddts_variance(*r);
        } catch (const std::domain_error&) {
        }
      }
      s.values.push_back(v);
    }
    p.series.push_back(std::move(s));
  }
  const std::vector<BarPanel> panels{p};
  return render_bar_panels(panels, 1, "Variance of DDTS rate by indication (without MXP)");
}

std::vector<std::filesystem::path> emit_results(const ResultsDocument& doc, const std::filesystem::path& dir) {
  if (doc.scenarios.empty()) throw std::invalid_argument("emit_results: no scenario results");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw OutputError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
  const std::vector<std::pair<std::string, std::string>> files = {
      {"cohort.csv", cohort_csv(doc.scenarios)},
      {"rates.csv", rates_csv(doc.scenarios)},
      {"prevalent.csv", prevalent_csv(doc.scenarios)},
      {"variance.csv", variance_csv(doc.scenarios)},
      {"results.json", results_to_json(doc).dump(2) + "\n"},
      {"fig_rates.svg", rates_figure_svg(doc.scenarios)},
      {"fig_variance.svg", variance_figure_svg(doc.scenarios)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, content] : files) {
    const auto path = dir / name;
    write_file(path, content);
    written.push_back(path);
  }
  return written;
}

}  // namespace rtmatch
