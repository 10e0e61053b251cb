#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rtmatch/classes.hpp"

namespace rtmatch {

/// Durations and clocks are in years.
using Years = double;

inline constexpr Years kInfinite = std::numeric_limits<double>::infinity();

/// Sentinel for items that are not awaiting a MELD exception. Any timer value
/// <= -1 means "not awaiting"; (-1, 0] means "grant now"; > 0 is the time left
/// until the grant.
inline constexpr Years kNoMxpTimer = -1.0;

constexpr bool mxp_timer_idle(Years timer) { return timer <= -1.0; }
constexpr bool mxp_timer_due(Years timer) { return timer > -1.0 && timer <= 0.0; }

/// One queued patient or organ.
struct Item {
  ClassId cls;
  Years real_patience = kInfinite;
  Years predictive_patience = kInfinite;
  Years waiting_time = 0.0;
  Years mxp_timer = kNoMxpTimer;
  /// Negative for items created during the initiation phase, positive otherwise.
  std::int64_t id = 0;

  // Bookkeeping for the fate ledger; not read by any policy.
  ClassId initial_class;
  Years arrival_time = 0.0;  // phase clock at arrival
};

/// Recipients in arrival order (front = oldest). Donors are never stored.
using QueueState = std::vector<Item>;

}  // namespace rtmatch
