#pragma once

// MELD-band transition graph and the awaiting -> MXP (waiting-time reset) edges.

#include <array>
#include <vector>

#include "rtmatch/classes.hpp"
#include "rtmatch/item.hpp"

namespace rtmatch {

/// Per-class arrival intensities xi (any positive scale; only ratios matter).
using ArrivalWeights = std::array<double, kClassCount>;

struct TransitionEdge {
  ClassId from;
  ClassId to;
  double rate = 0.0;  // per year
};

struct Destination {
  ClassId to;
  double probability = 0.0;  // within its direction
};

/// Outgoing MELD moves of one class, split by direction.
struct MeldMoves {
  std::vector<Destination> up;    // higher MELD (deterioration)
  std::vector<Destination> down;  // lower MELD (improvement)
  double up_probability = 0.0;    // P(direction = up | a move happens)

  bool eligible() const { return !up.empty() || !down.empty(); }
};

class TransitionGraph {
 public:
  /// E2 \ E3: MELD moves among non-awaiting CIRRH/HCC/OTHER classes.
  const std::vector<TransitionEdge>& meld_edges() const { return meld_edges_; }
  /// E3: awaiting -> MXP edges (same band); waiting time resets on these.
  const std::vector<TransitionEdge>& reset_edges() const { return reset_edges_; }

  const MeldMoves& moves(ClassId from) const { return moves_[from.index()]; }

  /// Sum of E2 \ E3 rates out of `from`.
  double total_meld_rate(ClassId from) const;

  bool is_reset_edge(ClassId from, ClassId to) const;

  /// Sets the rates stored on the E3 edges (one per awaiting class); the
  /// grant law itself lives in the survival module.
  void set_reset_rate(ClassId from, double rate);

 private:
  friend TransitionGraph build_transition_rates(const ArrivalWeights&, Years, double);

  std::vector<TransitionEdge> meld_edges_;
  std::vector<TransitionEdge> reset_edges_;
  std::array<MeldMoves, kClassCount> moves_{};
};

/// Default probability that a MELD move is a deterioration.
inline constexpr double kDefaultUpProbability = 2.0 / 3.0;

/// Builds lambda_{i,j} for every non-MXP, non-awaiting class i:
///   only up moves possible   -> lambda_ij = r * xi_j / sum_{W_up} xi
///   only down moves possible -> lambda_ij = r * xi_j / sum_{W_down} xi
///   both                     -> up:   r * q       * xi_j / sum_{W_up} xi
///                               down: r * (1 - q) * xi_j / sum_{W_down} xi
/// with r = 1 / mean_meld_change_time and q = up_probability. Each direction is
/// normalised over its own destination set.
///
/// Throws std::invalid_argument when a destination set has zero total weight,
/// or when the mean time or q are out of range.
TransitionGraph build_transition_rates(const ArrivalWeights& arrival_weights,
                                       Years mean_meld_change_time,
                                       double up_probability = kDefaultUpProbability);

}  // namespace rtmatch
