#include <doctest.h>

#include <fstream>
#include <sstream>

#include "rtmatch/config.hpp"
#include "support.hpp"

using namespace rtmatch;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_key(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("shipped default config") {
  const RunConfig c = parse_config(RTMATCH_DEFAULT_CONFIG);
  CHECK(enumerate_classes().size() == 28);
  CHECK(c.scenarios().size() == 8);
  CHECK(to_json(c) == to_json(default_run_config()));
  CHECK(config_hash(c) == config_hash(default_run_config()));
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("absent keys take defaults") {
  const RunConfig c = parse_config_text("{}");
  CHECK(to_json(c) == to_json(default_run_config()));

  const RunConfig s = parse_config_text(R"({"scenarios": {"shortage": [0, 0.25]}})");
  const auto specs = s.scenarios();
  REQUIRE(specs.size() == 4);
  CHECK(specs[0].policy == PolicyKind::Esdf);
  CHECK(specs[1].shortage == 0.25);
  CHECK(specs[2].policy == PolicyKind::Score);
  for (const auto& spec : specs) CHECK(spec.seed == s.seed);

  const RunConfig e = parse_config_text(R"({"scenarios": {"policies": ["EDF"]}, "seed": 42})");
  REQUIRE(e.scenarios().size() == 4);
  CHECK(e.scenarios()[0].policy == PolicyKind::Edf);
  CHECK(e.seed == 42);
}

TEST_CASE("round trip through canonical JSON") {
  RunConfig c = default_run_config();
  c.seed = 7;
  c.score.mxp_bonus = 650;
  c.patience.strata[1].baseline.shape = 1.3;
  c.shortage_levels = {0.1};
  const RunConfig back = parse_config_text(to_json(c).dump());
  CHECK(to_json(back) == to_json(c));
  CHECK(config_hash(back) == config_hash(c));
}

TEST_CASE("config hash tracks meaningful fields only") {
  const RunConfig base = default_run_config();
  RunConfig moved = base;
  moved.output_dir = "elsewhere";
  CHECK(config_hash(moved) == config_hash(base));
  RunConfig other = base;
  other.seed += 1;
  CHECK(config_hash(other) != config_hash(base));
  other = base;
  other.score.meld_base[2] += 1.0;
  CHECK(config_hash(other) != config_hash(base));
  other = base;
  other.engine.steps_per_year = 1000;
  CHECK(config_hash(other) != config_hash(base));
}

TEST_CASE("validation errors name the offending key") {
  // Shrinks every arrival probability by 10%.
  nlohmann::json j = to_json(default_run_config());
  j["arrivals"]["DONOR"] = j["arrivals"]["DONOR"].get<double>() * 0.9;
  for (const char* ind : {"CIRRH", "HCC", "OTHER"}) {
    for (auto& v : j["arrivals"][ind]) v = v.get<double>() * 0.9;
  }
  CHECK(error_key(j.dump()) == "arrivals");

  CHECK(error_key(R"({"sed": 1})") == "sed");
  CHECK(error_key(R"({"engine": {"steps_per_year": 1}})") == "engine.steps_per_year");
  CHECK(error_key(R"({"engine": {"steps_per_year": 2.5}})") == "engine.steps_per_year");
  CHECK(error_key(R"({"patience": {"HCC": {"scale": -1}}})") == "patience.HCC");
  CHECK(error_key(R"({"patience": {"HCC": {"beta": [1, 2]}}})") == "patience.HCC.beta");
  CHECK(error_key(R"({"patience": {"MXP": {"beta": [0, 0, 0, 0, 0, 0]}}})") == "patience.MXP.beta");
  CHECK(error_key(R"({"scenarios": {"shortage": [1.0]}})") == "scenarios.shortage");
  CHECK(error_key(R"({"scenarios": {"policies": ["FIFO"]}})") == "scenarios.policies");
  CHECK(error_key(R"({"scenarios": {"replications": 0}})") == "scenarios.replications");
  CHECK(error_key(R"({"awaits_mxp": {"CIRRH": [0.5, 0.5, 1.5]}})") == "awaits_mxp");
  CHECK(error_key(R"({"mxp_predictive_survival": [1.0, 0.5]})") == "mxp_predictive_survival");
  CHECK(error_key(R"({"seed": -3})") == "seed");
  CHECK(error_key("{not json") == "");
  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("arrival weights split the awaiting flag") {
  const RunConfig c = default_run_config();
  const ArrivalWeights xi = c.meld_weights();
  double total = 0.0;
  for (double v : xi) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  const ClassId cirrh1 = test::cls(Indication::Cirrh, MeldBand::B1);
  const ClassId cirrh1w = test::cls(Indication::Cirrh, MeldBand::B1, true);
  CHECK(xi[cirrh1.index()] / xi[cirrh1w.index()] == doctest::Approx(170.0 / 250.0));
  CHECK(xi[0] * 6216.0 == doctest::Approx(2458.0));
}
