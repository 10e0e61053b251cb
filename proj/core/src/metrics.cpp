#include "rtmatch/metrics.hpp"

namespace rtmatch {

bool in_stratum(const FateRecord& record, const Stratum& stratum) {
  const bool cohort_ok = stratum.cohort == Cohort::Incident ? record.incident : record.prevalent;
  if (!cohort_ok) return false;
  if (!stratum.indication) return true;
  return record.initial_class.is_recipient() &&
         record.initial_class.recipient_class().indication == *stratum.indication;
}

OutcomeCounts count_outcomes(std::span<const FateRecord> ledger, const Stratum& stratum) {
  OutcomeCounts c;
  for (const FateRecord& r : ledger) {
    if (!in_stratum(r, stratum)) continue;
    ++c.cohort;
    switch (r.outcome) {
      case Outcome::Deceased: ++c.ddts; break;
      case Outcome::Transplanted: ++c.ltx; break;
      case Outcome::Alive: ++c.alive; break;
    }
  }
  return c;
}

std::optional<RateTriple> crude_rates(const OutcomeCounts& counts) {
  if (counts.cohort == 0) return std::nullopt;
  const double n = static_cast<double>(counts.cohort);
  return RateTriple{static_cast<double>(counts.ddts) / n, static_cast<double>(counts.ltx) / n,
                    static_cast<double>(counts.alive) / n};
}

std::optional<RateTriple> crude_rates(std::span<const FateRecord> ledger, const Stratum& stratum) {
  return crude_rates(count_outcomes(ledger, stratum));
}

double ddts_variance(const std::array<double, 3>& rates) {
  // Pairwise form: exactly zero when the three rates are equal.
  const double a = rates[0] - rates[1];
  const double b = rates[0] - rates[2];
  const double c = rates[1] - rates[2];
  return (a * a + b * b + c * c) / 9.0;
}

CohortTable incident_cohort_counts(std::span<const FateRecord> ledger) {
  CohortTable table{};
  for (const FateRecord& r : ledger) {
    if (!r.incident || !r.initial_class.is_recipient()) continue;
    const RecipientClass& rc = r.initial_class.recipient_class();
    table[index_of(rc.indication)][index_of(rc.meld)] += 1.0;
  }
  return table;
}

}  // namespace rtmatch
