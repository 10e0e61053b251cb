#pragma once

// Endpoint statistics over fate ledgers: crude DDTS / LTx / alive rates and
// the dispersion of DDTS rates across CIRRH, HCC and OTHER.

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "rtmatch/engine.hpp"

namespace rtmatch {

enum class Cohort : std::uint8_t {
  Incident,   // arrived within the incident window of the study phase
  Prevalent,  // already queued when the study phase started
};

/// Selection of ledger records. `indication` empty = all indications.
struct Stratum {
  std::optional<Indication> indication;
  Cohort cohort = Cohort::Incident;
};

struct OutcomeCounts {
  std::int64_t cohort = 0;
  std::int64_t ddts = 0;
  std::int64_t ltx = 0;
  std::int64_t alive = 0;
};

struct RateTriple {
  double ddts = 0.0;
  double ltx = 0.0;
  double alive = 0.0;
};

bool in_stratum(const FateRecord& record, const Stratum& stratum);

OutcomeCounts count_outcomes(std::span<const FateRecord> ledger, const Stratum& stratum);

/// Crude rates over the stratum; empty when the stratum has no members.
std::optional<RateTriple> crude_rates(std::span<const FateRecord> ledger, const Stratum& stratum);
std::optional<RateTriple> crude_rates(const OutcomeCounts& counts);

/// Indications whose DDTS dispersion is the equity criterion (MXP excluded).
inline constexpr std::array<Indication, 3> kEquityIndications = {Indication::Cirrh, Indication::Hcc,
                                                                 Indication::Other};

/// Population variance (divide by 3) of the CIRRH, HCC and OTHER DDTS rates.
double ddts_variance(const std::array<double, 3>& rates);

/// Incident-cohort counts per (indication, MELD band) of the initial class.
using CohortTable = std::array<std::array<double, kMeldBandCount>, kIndicationCount>;
CohortTable incident_cohort_counts(std::span<const FateRecord> ledger);

}  // namespace rtmatch
