#include "rtmatch/transitions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rtmatch {

namespace {

// Same indication and awaits flag, band strictly above (up) or below (down).
std::vector<ClassId> neighbours(const RecipientClass& rc, bool up) {
  std::vector<ClassId> out;
  for (MeldBand band : kMeldBands) {
    if (up ? band <= rc.meld : band >= rc.meld) continue;
    const RecipientClass cand{rc.indication, band, rc.awaits_mxp};
    if (is_valid(cand)) out.push_back(ClassId::recipient(cand));
  }
  return out;
}

std::vector<Destination> normalise(const std::vector<ClassId>& targets, const ArrivalWeights& xi,
                                   ClassId from) {
  double total = 0.0;
  for (ClassId t : targets) {
    if (!(xi[t.index()] >= 0.0) || !std::isfinite(xi[t.index()])) {
      throw std::invalid_argument("arrival weight for " + to_string(t) + " must be finite and >= 0");
    }
    total += xi[t.index()];
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("zero arrival-weight normalisation for MELD moves out of " + to_string(from));
  }
  std::vector<Destination> out;
  out.reserve(targets.size());
  for (ClassId t : targets) out.push_back({t, xi[t.index()] / total});
  return out;
}

}  // namespace

double TransitionGraph::total_meld_rate(ClassId from) const {
  double total = 0.0;
  for (const auto& e : meld_edges_) {
    if (e.from == from) total += e.rate;
  }
  return total;
}

bool TransitionGraph::is_reset_edge(ClassId from, ClassId to) const {
  for (const auto& e : reset_edges_) {
    if (e.from == from && e.to == to) return true;
  }
  return false;
}

void TransitionGraph::set_reset_rate(ClassId from, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::invalid_argument("reset rate must be finite and >= 0");
  for (auto& e : reset_edges_) {
    if (e.from == from) {
      e.rate = rate;
      return;
    }
  }
  throw std::invalid_argument(to_string(from) + " has no MELD-exception edge");
}

TransitionGraph build_transition_rates(const ArrivalWeights& arrival_weights, Years mean_meld_change_time,
                                       double up_probability) {
  if (!(mean_meld_change_time > 0.0) || !std::isfinite(mean_meld_change_time)) {
    throw std::invalid_argument("mean MELD change time must be positive and finite");
  }
  if (!(up_probability >= 0.0 && up_probability <= 1.0)) {
    throw std::invalid_argument("MELD up probability must lie in [0, 1]");
  }
  const double rate = 1.0 / mean_meld_change_time;

  TransitionGraph g;
  for (ClassId id : enumerate_classes()) {
    if (id.is_donor()) continue;
    const RecipientClass& rc = id.recipient_class();

    if (rc.awaits_mxp) {
      const ClassId target = ClassId::recipient({Indication::Mxp, rc.meld, false});
      g.reset_edges_.push_back({id, target, 0.0});
      continue;
    }
    if (rc.indication == Indication::Mxp) continue;

    const auto up = neighbours(rc, true);
    const auto down = neighbours(rc, false);
    MeldMoves& moves = g.moves_[id.index()];
    double up_share = 0.0;
    if (!up.empty() && !down.empty()) {
      up_share = up_probability;
    } else if (!up.empty()) {
      up_share = 1.0;
    }
    moves.up_probability = up_share;
    if (!up.empty()) moves.up = normalise(up, arrival_weights, id);
    if (!down.empty()) moves.down = normalise(down, arrival_weights, id);

    for (const auto& d : moves.up) g.meld_edges_.push_back({id, d.to, rate * up_share * d.probability});
    for (const auto& d : moves.down) {
      g.meld_edges_.push_back({id, d.to, rate * (1.0 - up_share) * d.probability});
    }
  }
  return g;
}

}  // namespace rtmatch
