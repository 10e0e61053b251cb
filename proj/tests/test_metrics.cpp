#include <doctest.h>

#include <stdexcept>

#include "rtmatch/metrics.hpp"
#include "rtmatch/scenarios.hpp"
#include "support.hpp"

using namespace rtmatch;
using rtmatch::test::cls;

namespace {

FateRecord fate(std::int64_t id, ClassId c, Outcome o, bool incident = true) {
  FateRecord f;
  f.id = id;
  f.initial_class = c;
  f.outcome = o;
  f.prevalent = id < 0;
  f.incident = incident && id > 0;
  return f;
}

}  // namespace

TEST_CASE("crude rates") {
  std::vector<FateRecord> ledger;
  const ClassId c = cls(Indication::Hcc, MeldBand::B2);
  for (int i = 0; i < 4; ++i) ledger.push_back(fate(i + 1, c, Outcome::Transplanted));
  for (int i = 0; i < 5; ++i) ledger.push_back(fate(i + 10, c, Outcome::Deceased));
  ledger.push_back(fate(20, c, Outcome::Alive));
  // Outside the incident cohort: ignored by incident strata.
  ledger.push_back(fate(-1, c, Outcome::Deceased));
  ledger.push_back(fate(30, c, Outcome::Deceased, false));

  const auto r = crude_rates(ledger, Stratum{});
  REQUIRE(r.has_value());
  CHECK(r->ltx == doctest::Approx(0.4));
  CHECK(r->ddts == doctest::Approx(0.5));
  CHECK(r->alive == doctest::Approx(0.1));

  const OutcomeCounts n = count_outcomes(ledger, Stratum{Indication::Hcc, Cohort::Incident});
  CHECK(n.cohort == 10);
  CHECK(n.ddts + n.ltx + n.alive == n.cohort);

  const auto prevalent = crude_rates(ledger, Stratum{std::nullopt, Cohort::Prevalent});
  REQUIRE(prevalent.has_value());
  CHECK(prevalent->ddts == 1.0);

  CHECK_FALSE(crude_rates(ledger, Stratum{Indication::Mxp, Cohort::Incident}).has_value());

  std::vector<FateRecord> all_ltx = {fate(1, c, Outcome::Transplanted), fate(2, c, Outcome::Transplanted)};
  const auto t = crude_rates(all_ltx, Stratum{});
  CHECK(t->ddts == 0.0);
  CHECK(t->ltx == 1.0);
  CHECK(t->alive == 0.0);
}

TEST_CASE("DDTS variance") {
  CHECK(ddts_variance(std::array<double, 3>{0.4, 0.4, 0.4}) == 0.0);
  CHECK(ddts_variance(std::array<double, 3>{0.3, 0.4, 0.5}) == doctest::Approx(0.02 / 3.0).epsilon(1e-12));
  CHECK(ddts_variance(std::array<double, 3>{0.0, 1.0, 0.5}) > 0.0);

  ScenarioResult r;
  for (std::size_t k = 0; k < kIndicationCount; ++k) r.incident[k].ddts = 0.1 * static_cast<double>(k + 1);
  CHECK(ddts_variance(r) == doctest::Approx(ddts_variance(std::array<double, 3>{0.1, 0.2, 0.4})));
  r.incident[index_of(Indication::Hcc)].ddts.reset();
  CHECK_THROWS_AS(ddts_variance(r), std::domain_error);
  r.incident[index_of(Indication::Hcc)].ddts = 0.2;
  r.incident[index_of(Indication::Mxp)].ddts.reset();
  CHECK_NOTHROW(ddts_variance(r));
}

TEST_CASE("cohort table partitions the incident cohort") {
  std::vector<FateRecord> ledger;
  std::int64_t id = 1;
  for (ClassId c : enumerate_classes()) {
    if (c.is_donor()) continue;
    for (int k = 0; k < 3; ++k) ledger.push_back(fate(id++, c, Outcome::Alive));
  }
  ledger.push_back(fate(-5, cls(Indication::Cirrh, MeldBand::B1), Outcome::Alive));
  const CohortTable t = incident_cohort_counts(ledger);
  double total = 0.0;
  for (const auto& row : t) {
    for (double v : row) total += v;
  }
  CHECK(total == 27 * 3);
  CHECK(t[index_of(Indication::Cirrh)][0] == 6);  // awaiting and non-awaiting share the band
  CHECK(t[index_of(Indication::Mxp)][3] == 0);
}
