#pragma once

// Patience-time laws: stratified Cox model with a Weibull baseline, a
// tabulated law for MXP predictive patience, and the MELD-exception grant law.
// Every sampler is a pure function of (law, conditioning time, uniform).

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "rtmatch/classes.hpp"
#include "rtmatch/item.hpp"

namespace rtmatch {

/// Lambda0(t) = (t / scale)^shape. shape = 1 is the exponential baseline.
struct WeibullBaseline {
  double scale = 1.0;
  double shape = 1.0;

  double cumulative_hazard(Years t) const;
  Years inverse_cumulative_hazard(double h) const;
};

/// One Cox stratum restricted to a MELD band: cumulative hazard Lambda0(t) e^beta.
struct CoxLaw {
  WeibullBaseline baseline;
  double beta = 0.0;

  double survival(Years t) const;
};

/// Piecewise-linear survival function through (time[k], survival[k]).
/// time[0] = 0, survival[0] = 1, both strictly/weakly monotone, survival.back() = 0.
struct EmpiricalLaw {
  std::vector<Years> time;
  std::vector<double> survival;

  double survival_at(Years t) const;
  /// Smallest t with S(t) = s, for s in (0, 1).
  Years quantile_of_survival(double s) const;
  Years support_end() const { return time.back(); }

  /// Monthly grid from survival values given at 0, 1, 2, ... months.
  static EmpiricalLaw monthly(const std::vector<double>& survival_by_month);
};

/// Classes without a patience clock.
struct NoPatience {};

using PatienceLaw = std::variant<CoxLaw, EmpiricalLaw, NoPatience>;

/// Throws std::invalid_argument when the law violates its invariants.
void validate(const WeibullBaseline& baseline);
void validate(const CoxLaw& law);
void validate(const EmpiricalLaw& law);

/// Stratum of the Cox model: one baseline, one coefficient per MELD band.
struct CoxStratum {
  WeibullBaseline baseline;
  std::array<double, kMeldBandCount> beta{};
};

/// Patience model stratified by indication, MELD band as the only covariate.
struct CoxModel {
  std::array<CoxStratum, kIndicationCount> strata{};

  CoxLaw law(Indication indication, MeldBand band) const;
  CoxLaw law(const RecipientClass& rc) const { return law(rc.indication, rc.meld); }
};

/// Awaiting -> MXP transition-time law, Cox form per indication (CIRRH, OTHER).
struct MxpGrantModel {
  std::array<CoxStratum, kIndicationCount> strata{};

  CoxLaw law(const RecipientClass& rc) const;
  /// Mean grant time; used to label the E3 edge rates.
  Years mean_time(const RecipientClass& rc) const;
};

/// T = Lambda0^{-1}(-ln u / e^beta) for Cox laws, the survival quantile for
/// tabulated laws. Throws std::invalid_argument if u is outside (0, 1) and
/// std::logic_error for NoPatience.
Years sample_patience(const PatienceLaw& law, double u);

/// Draws P from (law | P >= c) and returns P - c.
/// For a tabulated law with no mass beyond c, returns max(support_end - c, min_residual).
Years sample_conditional_shifted(const PatienceLaw& law, Years c, double u, Years min_residual = 0.0);

/// Draws P from (law | P >= floor) and returns P itself (>= floor).
Years sample_patience_conditioned_above(const PatienceLaw& law, Years floor, double u,
                                        Years min_residual = 0.0);

/// Time until the MELD exception is granted. Throws std::logic_error if the
/// class is not awaiting an exception.
Years sample_mxp_grant_time(const MxpGrantModel& model, const RecipientClass& rc, double u);

}  // namespace rtmatch
