#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "rtmatch/classes.hpp"
#include "rtmatch/item.hpp"

namespace rtmatch {

enum class PolicyKind : std::uint8_t { Edf, Esdf, Score };

inline constexpr std::array<PolicyKind, 3> kPolicyKinds = {PolicyKind::Edf, PolicyKind::Esdf,
                                                           PolicyKind::Score};

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view text);

/// S(class, waiting_time) = base[band] + slope[indication] * waiting_time
///                          + (mxp_bonus if indication == MXP).
struct ScoreParams {
  std::array<double, kMeldBandCount> meld_base{100.0, 280.0, 460.0, 640.0, 820.0, 1000.0};
  std::array<double, kIndicationCount> wait_slope{0.0, 300.0, 300.0, 300.0};  // points / year
  double mxp_bonus = 725.0;

  ScoreParams scaled(double factor) const;
};

/// Throws std::invalid_argument for negative or non-finite parameters.
void validate(const ScoreParams& params);

double score(const ScoreParams& params, const RecipientClass& rc, Years waiting_time);

/// Chooses the queued recipient to match with an incoming donor, or nothing if
/// no compatible recipient waits. Ties go to the lowest index (earliest arrival).
///   EDF   : minimum real_patience       (never reads predictive_patience)
///   ESDF  : minimum predictive_patience (never reads real_patience)
///   SCORE : maximum score(class, waiting_time)
/// Throws std::logic_error if `incoming` is not a donor.
std::optional<std::size_t> choose_match(PolicyKind kind, std::span<const Item> queue, const Item& incoming,
                                        const CompatibilityGraph& graph, const ScoreParams& params);

}  // namespace rtmatch
