#include "rtmatch/survival.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rtmatch {

namespace {

void check_uniform(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("uniform variate must lie in (0, 1)");
}

void check_time(Years c, const char* what) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
  }
}

// Absolute time P >= c drawn from (law | P >= c).
Years cox_conditional(const CoxLaw& law, Years c, double u) {
  const double target = law.baseline.cumulative_hazard(c) - std::log(u) / std::exp(law.beta);
  return std::max(law.baseline.inverse_cumulative_hazard(target), c);
}

struct Conditional {
  Years absolute;
  bool exhausted;  // no survival mass beyond c
};

Conditional empirical_conditional(const EmpiricalLaw& law, Years c, double u) {
  const double mass = law.survival_at(c);
  if (!(mass > 0.0)) return {law.support_end(), true};
  return {std::max(law.quantile_of_survival(u * mass), c), false};
}

}  // namespace

double WeibullBaseline::cumulative_hazard(Years t) const {
  if (t <= 0.0) return 0.0;
  return std::pow(t / scale, shape);
}

Years WeibullBaseline::inverse_cumulative_hazard(double h) const {
  if (h <= 0.0) return 0.0;
  if (std::isinf(h)) return kInfinite;
  return scale * std::pow(h, 1.0 / shape);
}

double CoxLaw::survival(Years t) const {
  return std::exp(-baseline.cumulative_hazard(t) * std::exp(beta));
}

double EmpiricalLaw::survival_at(Years t) const {
  if (t <= time.front()) return survival.front();
  if (t >= time.back()) return survival.back();
  const auto hi = std::upper_bound(time.begin(), time.end(), t);
  const std::size_t k = static_cast<std::size_t>(hi - time.begin());
  const double w = (t - time[k - 1]) / (time[k] - time[k - 1]);
  return survival[k - 1] + w * (survival[k] - survival[k - 1]);
}

Years EmpiricalLaw::quantile_of_survival(double s) const {
  // First grid index whose survival is <= s; S is nonincreasing.
  std::size_t k = 1;
  while (k < survival.size() && survival[k] > s) ++k;
  if (k == survival.size()) return time.back();
  const double s0 = survival[k - 1];
  const double s1 = survival[k];
  if (s0 == s1) return time[k - 1];
  const double w = (s0 - s) / (s0 - s1);
  return time[k - 1] + w * (time[k] - time[k - 1]);
}

EmpiricalLaw EmpiricalLaw::monthly(const std::vector<double>& survival_by_month) {
  EmpiricalLaw law;
  law.survival = survival_by_month;
  law.time.reserve(survival_by_month.size());
  for (std::size_t m = 0; m < survival_by_month.size(); ++m) law.time.push_back(static_cast<double>(m) / 12.0);
  return law;
}

void validate(const WeibullBaseline& baseline) {
  if (!(baseline.scale > 0.0) || !std::isfinite(baseline.scale)) {
    throw std::invalid_argument("Weibull scale must be positive and finite");
  }
  if (!(baseline.shape > 0.0) || !std::isfinite(baseline.shape)) {
    throw std::invalid_argument("Weibull shape must be positive and finite");
  }
}

void validate(const CoxLaw& law) {
  validate(law.baseline);
  const double hr = std::exp(law.beta);
  if (!std::isfinite(law.beta) || !(hr > 0.0) || !std::isfinite(hr)) {
    throw std::invalid_argument("Cox coefficient must give a finite positive hazard ratio");
  }
}

void validate(const EmpiricalLaw& law) {
  if (law.time.size() < 2 || law.time.size() != law.survival.size()) {
    throw std::invalid_argument("tabulated survival needs >= 2 points and matching time/survival sizes");
  }
  if (law.time.front() != 0.0 || law.survival.front() != 1.0) {
    throw std::invalid_argument("tabulated survival must start at (0, 1)");
  }
  for (std::size_t k = 1; k < law.time.size(); ++k) {
    if (!(law.time[k] > law.time[k - 1])) throw std::invalid_argument("tabulated survival times must increase");
    if (!(law.survival[k] <= law.survival[k - 1]) || law.survival[k] < 0.0) {
      throw std::invalid_argument("tabulated survival must be nonincreasing and >= 0");
    }
  }
  if (law.survival.back() != 0.0) throw std::invalid_argument("tabulated survival must reach 0");
}

CoxLaw CoxModel::law(Indication indication, MeldBand band) const {
  const CoxStratum& s = strata[index_of(indication)];
  return CoxLaw{s.baseline, s.beta[index_of(band)]};
}

CoxLaw MxpGrantModel::law(const RecipientClass& rc) const {
  const CoxStratum& s = strata[index_of(rc.indication)];
  return CoxLaw{s.baseline, s.beta[index_of(rc.meld)]};
}

Years MxpGrantModel::mean_time(const RecipientClass& rc) const {
  // E[T] for Weibull with cumulative hazard (t/scale)^k e^beta.
  const CoxLaw l = law(rc);
  const double k = l.baseline.shape;
  return l.baseline.scale * std::exp(-l.beta / k) * std::tgamma(1.0 + 1.0 / k);
}

Years sample_patience(const PatienceLaw& law, double u) {
  check_uniform(u);
  if (const auto* cox = std::get_if<CoxLaw>(&law)) {
    return cox->baseline.inverse_cumulative_hazard(-std::log(u) / std::exp(cox->beta));
  }
  if (const auto* emp = std::get_if<EmpiricalLaw>(&law)) return emp->quantile_of_survival(u);
  throw std::logic_error("sample_patience: class has no patience law");
}

Years sample_conditional_shifted(const PatienceLaw& law, Years c, double u, Years min_residual) {
  check_uniform(u);
  check_time(c, "conditioning time");
  if (const auto* cox = std::get_if<CoxLaw>(&law)) return cox_conditional(*cox, c, u) - c;
  if (const auto* emp = std::get_if<EmpiricalLaw>(&law)) {
    const Conditional r = empirical_conditional(*emp, c, u);
    if (r.exhausted) return std::max(r.absolute - c, min_residual);
    return r.absolute - c;
  }
  throw std::logic_error("sample_conditional_shifted: class has no patience law");
}

Years sample_patience_conditioned_above(const PatienceLaw& law, Years floor, double u, Years min_residual) {
  check_uniform(u);
  check_time(floor, "conditioning floor");
  if (const auto* cox = std::get_if<CoxLaw>(&law)) return cox_conditional(*cox, floor, u);
  if (const auto* emp = std::get_if<EmpiricalLaw>(&law)) {
    const Conditional r = empirical_conditional(*emp, floor, u);
    if (r.exhausted) return floor + std::max(r.absolute - floor, min_residual);
    return r.absolute;
  }
  throw std::logic_error("sample_patience_conditioned_above: class has no patience law");
}

Years sample_mxp_grant_time(const MxpGrantModel& model, const RecipientClass& rc, double u) {
  if (!rc.awaits_mxp) throw std::logic_error("sample_mxp_grant_time: class is not awaiting a MELD exception");
  check_uniform(u);
  const CoxLaw l = model.law(rc);
  return l.baseline.inverse_cumulative_hazard(-std::log(u) / std::exp(l.beta));
}

}  // namespace rtmatch
