#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rtmatch/config.hpp"
#include "rtmatch/engine.hpp"

namespace rtmatch::test {

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

/// One-sample KS statistic against a continuous CDF.
template <typename Cdf>
double ks_distance(std::vector<double> a, Cdf cdf) {
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

inline ClassId cls(Indication ind, MeldBand band, bool awaits = false) {
  return ClassId::recipient(RecipientClass{ind, band, awaits});
}

inline Item recipient(ClassId c, double real, double predictive, double wait = 0.0, std::int64_t id = 1) {
  Item it;
  it.cls = c;
  it.initial_class = c;
  it.real_patience = real;
  it.predictive_patience = predictive;
  it.waiting_time = wait;
  it.id = id;
  return it;
}

inline Item donor() {
  Item it;
  it.cls = ClassId::donor();
  return it;
}

/// Shipped defaults with shorter phases for fast engine tests.
inline RunConfig small_config(double initiation_years = 3.0, double study_years = 2.0) {
  RunConfig c = default_run_config();
  c.engine.initiation_years = initiation_years;
  c.engine.study_years = study_years;
  c.engine.incident_window_years = std::min(2.0, study_years);
  return c;
}

}  // namespace rtmatch::test
