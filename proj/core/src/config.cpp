#include "rtmatch/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace rtmatch {

using nlohmann::json;

namespace {

// Shipped calibration. Arrival counts are per two years, per MELD band.
constexpr double kDonorsPerTwoYears = 2458.0;
constexpr std::array<double, kMeldBandCount> kCirrhCounts = {170, 180, 200, 230, 250, 304};
constexpr std::array<double, kMeldBandCount> kHccCounts = {480, 300, 220, 140, 100, 64};
constexpr std::array<double, kMeldBandCount> kOtherCounts = {100, 80, 60, 50, 40, 10};
constexpr std::array<double, 3> kCirrhAwaitingCounts = {250, 130, 70};
constexpr std::array<double, 3> kOtherAwaitingCounts = {180, 100, 50};

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void require_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(path, key), "unknown key");
  }
}

double read_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
  return d;
}

void read_number(const json& obj, std::string_view key, const std::string& path, double& out) {
  if (obj.contains(key)) out = read_number(obj.at(std::string(key)), join(path, key));
}

void read_int(const json& obj, std::string_view key, const std::string& path, int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(std::string(key));
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  out = v.get<int>();
}

template <std::size_t N>
void read_array(const json& obj, std::string_view key, const std::string& path, std::array<double, N>& out,
                std::size_t expected = N) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(std::string(key));
  const std::string p = join(path, key);
  if (!v.is_array() || v.size() != expected) {
    throw ConfigError(p, "expected an array of " + std::to_string(expected) + " numbers");
  }
  for (std::size_t i = 0; i < expected; ++i) out[i] = read_number(v[i], p + "[" + std::to_string(i) + "]");
}

std::vector<double> read_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::size_t bands_of(Indication ind) { return ind == Indication::Mxp ? 3 : kMeldBandCount; }

void read_stratum(const json& obj, const std::string& path, CoxStratum& s, std::size_t bands) {
  require_keys(obj, path, {"scale", "shape", "beta"});
  read_number(obj, "scale", path, s.baseline.scale);
  read_number(obj, "shape", path, s.baseline.shape);
  read_array(obj, "beta", path, s.beta, bands);
}

json stratum_json(const CoxStratum& s, std::size_t bands) {
  json beta = json::array();
  for (std::size_t b = 0; b < bands; ++b) beta.push_back(s.beta[b]);
  return json{{"scale", s.baseline.scale}, {"shape", s.baseline.shape}, {"beta", beta}};
}

ClassId cls(Indication ind, MeldBand band, bool awaits = false) { return ClassId::recipient({ind, band, awaits}); }

std::vector<double> default_mxp_predictive() {
  // Time to transplant after an exception, observed over four years:
  // exponential with a 12-month mean, truncated at 48 months.
  std::vector<double> s;
  const double tail = std::exp(-48.0 / 12.0);
  for (int m = 0; m <= 48; ++m) {
    const double v = (std::exp(-m / 12.0) - tail) / (1.0 - tail);
    s.push_back(std::round(v * 1e6) / 1e6);
  }
  s.front() = 1.0;
  s.back() = 0.0;
  return s;
}

constexpr std::array<std::string_view, 3> kArrivalIndications = {"CIRRH", "HCC", "OTHER"};
constexpr std::array<Indication, 3> kArrivalIndicationValues = {Indication::Cirrh, Indication::Hcc,
                                                                Indication::Other};

}  // namespace

std::vector<ScenarioSpec> RunConfig::scenarios() const {
  std::vector<ScenarioSpec> out;
  for (PolicyKind p : policies) {
    for (double s : shortage_levels) out.push_back({p, s, replications, seed});
  }
  return out;
}

ArrivalWeights RunConfig::meld_weights() const {
  ArrivalWeights xi{};
  for (ClassId id : enumerate_classes()) {
    const double p = engine.arrival_probability[id.index()];
    const double q = engine.awaits_probability[id.index()];
    xi[id.index()] += p * (1.0 - q);
    if (q > 0.0) {
      RecipientClass rc = id.recipient_class();
      rc.awaits_mxp = true;
      xi[ClassId::recipient(rc).index()] += p * q;
    }
  }
  return xi;
}

Models RunConfig::build_models() const {
  return Models(patience, EmpiricalLaw::monthly(mxp_predictive_monthly), grant, score,
                build_transition_rates(meld_weights(), engine.mean_meld_change_years, meld_up_probability));
}

void RunConfig::validate() const {
  try {
    rtmatch::validate(engine);
  } catch (const std::invalid_argument& e) {
    // Engine messages lead with the config key they concern.
    const std::string what = e.what();
    const auto space = what.find(' ');
    if (space == std::string::npos) throw ConfigError("engine", what);
    throw ConfigError(what.substr(0, space), what.substr(space + 1));
  }
  if (!(meld_up_probability >= 0.0 && meld_up_probability <= 1.0)) {
    throw ConfigError("engine.meld_up_probability", "must lie in [0, 1]");
  }
  for (Indication ind : kIndications) {
    const std::string p = "patience." + std::string(to_string(ind));
    const CoxStratum& s = patience.strata[index_of(ind)];
    try {
      rtmatch::validate(s.baseline);
      for (std::size_t b = 0; b < bands_of(ind); ++b) rtmatch::validate(CoxLaw{s.baseline, s.beta[b]});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(p, e.what());
    }
  }
  for (Indication ind : {Indication::Cirrh, Indication::Other}) {
    const CoxStratum& s = grant.strata[index_of(ind)];
    try {
      rtmatch::validate(s.baseline);
      for (std::size_t b = 0; b < 3; ++b) rtmatch::validate(CoxLaw{s.baseline, s.beta[b]});
    } catch (const std::invalid_argument& e) {
      throw ConfigError("mxp_grant." + std::string(to_string(ind)), e.what());
    }
  }
  try {
    rtmatch::validate(EmpiricalLaw::monthly(mxp_predictive_monthly));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("mxp_predictive_survival", e.what());
  }
  try {
    rtmatch::validate(score);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("score", e.what());
  }
  if (policies.empty()) throw ConfigError("scenarios.policies", "at least one policy is required");
  if (shortage_levels.empty()) throw ConfigError("scenarios.shortage", "at least one shortage level is required");
  for (double s : shortage_levels) {
    if (!(s >= 0.0 && s < 1.0)) throw ConfigError("scenarios.shortage", "levels must lie in [0, 1)");
  }
  if (replications < 1) throw ConfigError("scenarios.replications", "must be >= 1");
  try {
    (void)build_models();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
}

RunConfig default_run_config() {
  RunConfig c;
  EngineConfig& e = c.engine;
  e.steps_per_year = 3108;
  e.initiation_years = 15.0;
  e.study_years = 10.0;
  e.incident_window_years = 2.0;
  e.mean_meld_change_years = 2.0;

  double total = kDonorsPerTwoYears;
  for (std::size_t b = 0; b < kMeldBandCount; ++b) total += kCirrhCounts[b] + kHccCounts[b] + kOtherCounts[b];
  for (std::size_t b = 0; b < 3; ++b) total += kCirrhAwaitingCounts[b] + kOtherAwaitingCounts[b];

  e.arrival_probability[ClassId::donor().index()] = kDonorsPerTwoYears / total;
  for (MeldBand band : kMeldBands) {
    const std::size_t b = index_of(band);
    const double cirrh_wait = b < 3 ? kCirrhAwaitingCounts[b] : 0.0;
    const double other_wait = b < 3 ? kOtherAwaitingCounts[b] : 0.0;
    e.arrival_probability[cls(Indication::Cirrh, band).index()] = (kCirrhCounts[b] + cirrh_wait) / total;
    e.arrival_probability[cls(Indication::Hcc, band).index()] = kHccCounts[b] / total;
    e.arrival_probability[cls(Indication::Other, band).index()] = (kOtherCounts[b] + other_wait) / total;
    if (b < 3) {
      e.awaits_probability[cls(Indication::Cirrh, band).index()] = cirrh_wait / (kCirrhCounts[b] + cirrh_wait);
      e.awaits_probability[cls(Indication::Other, band).index()] = other_wait / (kOtherCounts[b] + other_wait);
    }
  }

  c.meld_up_probability = kDefaultUpProbability;

  c.patience.strata[index_of(Indication::Cirrh)] = {{12.0, 1.0}, {0.0, 0.5, 1.0, 1.8, 2.6, 3.5}};
  c.patience.strata[index_of(Indication::Hcc)] = {{6.0, 1.0}, {0.0, 0.3, 0.6, 1.2, 1.8, 2.5}};
  c.patience.strata[index_of(Indication::Mxp)] = {{25.0, 1.0}, {0.0, 0.2, 0.4, 0.0, 0.0, 0.0}};
  c.patience.strata[index_of(Indication::Other)] = {{10.0, 1.0}, {0.0, 0.5, 1.0, 1.8, 2.6, 3.5}};

  c.mxp_predictive_monthly = default_mxp_predictive();

  c.grant.strata[index_of(Indication::Cirrh)] = {{0.4, 1.0}, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}};
  c.grant.strata[index_of(Indication::Other)] = {{0.4, 1.0}, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}};
  // Unused strata still need a valid baseline.
  c.grant.strata[index_of(Indication::Hcc)] = {{1.0, 1.0}, {}};
  c.grant.strata[index_of(Indication::Mxp)] = {{1.0, 1.0}, {}};

  c.score = ScoreParams{};

  c.policies = {PolicyKind::Esdf, PolicyKind::Score};
  c.shortage_levels = {0.0, 0.15, 0.30, 0.50};
  c.replications = 10;
  c.seed = 20240101;
  c.output_dir = "results";
  return c;
}

RunConfig parse_config_text(std::string_view text, const std::string& source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", source + ": malformed JSON: " + e.what());
  }
  require_keys(root, "", {"seed", "output_dir", "engine", "arrivals", "awaits_mxp", "patience",
                          "mxp_predictive_survival", "mxp_grant", "score", "scenarios"});

  RunConfig c = default_run_config();

  if (root.contains("seed")) {
    const json& v = root.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    c.seed = v.get<std::uint64_t>();
  }
  if (root.contains("output_dir")) {
    if (!root.at("output_dir").is_string()) throw ConfigError("output_dir", "expected a string");
    c.output_dir = root.at("output_dir").get<std::string>();
  }

  if (root.contains("engine")) {
    const json& e = root.at("engine");
    require_keys(e, "engine", {"steps_per_year", "initiation_years", "study_years", "incident_window_years",
                               "mean_meld_change_years", "meld_up_probability"});
    read_int(e, "steps_per_year", "engine", c.engine.steps_per_year);
    read_number(e, "initiation_years", "engine", c.engine.initiation_years);
    read_number(e, "study_years", "engine", c.engine.study_years);
    read_number(e, "incident_window_years", "engine", c.engine.incident_window_years);
    read_number(e, "mean_meld_change_years", "engine", c.engine.mean_meld_change_years);
    read_number(e, "meld_up_probability", "engine", c.meld_up_probability);
  }

  if (root.contains("arrivals")) {
    const json& a = root.at("arrivals");
    require_keys(a, "arrivals", {"DONOR", "CIRRH", "HCC", "OTHER"});
    read_number(a, "DONOR", "arrivals", c.engine.arrival_probability[ClassId::donor().index()]);
    for (std::size_t k = 0; k < kArrivalIndications.size(); ++k) {
      std::array<double, kMeldBandCount> v{};
      for (MeldBand b : kMeldBands) v[index_of(b)] = c.engine.arrival_probability[cls(kArrivalIndicationValues[k], b).index()];
      read_array(a, kArrivalIndications[k], "arrivals", v);
      for (MeldBand b : kMeldBands) c.engine.arrival_probability[cls(kArrivalIndicationValues[k], b).index()] = v[index_of(b)];
    }
  }

  if (root.contains("awaits_mxp")) {
    const json& a = root.at("awaits_mxp");
    require_keys(a, "awaits_mxp", {"CIRRH", "OTHER"});
    for (Indication ind : {Indication::Cirrh, Indication::Other}) {
      std::array<double, 3> v{};
      for (std::size_t b = 0; b < 3; ++b) v[b] = c.engine.awaits_probability[cls(ind, kMeldBands[b]).index()];
      read_array(a, to_string(ind), "awaits_mxp", v);
      for (std::size_t b = 0; b < 3; ++b) c.engine.awaits_probability[cls(ind, kMeldBands[b]).index()] = v[b];
    }
  }

  if (root.contains("patience")) {
    const json& p = root.at("patience");
    require_keys(p, "patience", {"CIRRH", "HCC", "MXP", "OTHER"});
    for (Indication ind : kIndications) {
      const std::string key(to_string(ind));
      if (p.contains(key)) read_stratum(p.at(key), "patience." + key, c.patience.strata[index_of(ind)], bands_of(ind));
    }
  }

  if (root.contains("mxp_predictive_survival")) {
    c.mxp_predictive_monthly = read_vector(root.at("mxp_predictive_survival"), "mxp_predictive_survival");
  }

  if (root.contains("mxp_grant")) {
    const json& g = root.at("mxp_grant");
    require_keys(g, "mxp_grant", {"CIRRH", "OTHER"});
    for (Indication ind : {Indication::Cirrh, Indication::Other}) {
      const std::string key(to_string(ind));
      if (g.contains(key)) read_stratum(g.at(key), "mxp_grant." + key, c.grant.strata[index_of(ind)], 3);
    }
  }

  if (root.contains("score")) {
    const json& s = root.at("score");
    require_keys(s, "score", {"meld_base", "wait_slope", "mxp_bonus"});
    read_array(s, "meld_base", "score", c.score.meld_base);
    read_number(s, "mxp_bonus", "score", c.score.mxp_bonus);
    if (s.contains("wait_slope")) {
      const json& w = s.at("wait_slope");
      require_keys(w, "score.wait_slope", {"CIRRH", "HCC", "MXP", "OTHER"});
      for (Indication ind : kIndications) {
        read_number(w, to_string(ind), "score.wait_slope", c.score.wait_slope[index_of(ind)]);
      }
    }
  }

  if (root.contains("scenarios")) {
    const json& s = root.at("scenarios");
    require_keys(s, "scenarios", {"policies", "shortage", "replications"});
    if (s.contains("policies")) {
      const json& v = s.at("policies");
      if (!v.is_array()) throw ConfigError("scenarios.policies", "expected an array of policy names");
      c.policies.clear();
      for (const json& name : v) {
        const auto kind = name.is_string() ? parse_policy(name.get<std::string>()) : std::nullopt;
        if (!kind) throw ConfigError("scenarios.policies", "unknown policy " + name.dump());
        c.policies.push_back(*kind);
      }
    }
    if (s.contains("shortage")) c.shortage_levels = read_vector(s.at("shortage"), "scenarios.shortage");
    read_int(s, "replications", "scenarios", c.replications);
  }

  c.validate();
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["engine"] = {{"steps_per_year", c.engine.steps_per_year},
                 {"initiation_years", c.engine.initiation_years},
                 {"study_years", c.engine.study_years},
                 {"incident_window_years", c.engine.incident_window_years},
                 {"mean_meld_change_years", c.engine.mean_meld_change_years},
                 {"meld_up_probability", c.meld_up_probability}};
  json arrivals;
  arrivals["DONOR"] = c.engine.arrival_probability[ClassId::donor().index()];
  for (std::size_t k = 0; k < kArrivalIndications.size(); ++k) {
    json v = json::array();
    for (MeldBand b : kMeldBands) v.push_back(c.engine.arrival_probability[cls(kArrivalIndicationValues[k], b).index()]);
    arrivals[std::string(kArrivalIndications[k])] = v;
  }
  j["arrivals"] = arrivals;
  json awaits;
  for (Indication ind : {Indication::Cirrh, Indication::Other}) {
    json v = json::array();
    for (std::size_t b = 0; b < 3; ++b) v.push_back(c.engine.awaits_probability[cls(ind, kMeldBands[b]).index()]);
    awaits[std::string(to_string(ind))] = v;
  }
  j["awaits_mxp"] = awaits;
  json patience;
  for (Indication ind : kIndications) {
    patience[std::string(to_string(ind))] = stratum_json(c.patience.strata[index_of(ind)], bands_of(ind));
  }
  j["patience"] = patience;
  j["mxp_predictive_survival"] = c.mxp_predictive_monthly;
  json grant;
  for (Indication ind : {Indication::Cirrh, Indication::Other}) {
    grant[std::string(to_string(ind))] = stratum_json(c.grant.strata[index_of(ind)], 3);
  }
  j["mxp_grant"] = grant;
  json slope;
  for (Indication ind : kIndications) slope[std::string(to_string(ind))] = c.score.wait_slope[index_of(ind)];
  j["score"] = {{"meld_base", c.score.meld_base}, {"wait_slope", slope}, {"mxp_bonus", c.score.mxp_bonus}};
  json policies = json::array();
  for (PolicyKind p : c.policies) policies.push_back(std::string(to_string(p)));
  j["scenarios"] = {{"policies", policies}, {"shortage", c.shortage_levels}, {"replications", c.replications}};
  return j;
}

std::uint64_t config_hash(const RunConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace rtmatch
