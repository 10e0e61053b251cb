#include "rtmatch/policies.hpp"

#include <cmath>
#include <stdexcept>

namespace rtmatch {

namespace {

// Index of the compatible item with the strictly best key; first one wins ties.
template <typename Key, typename Better>
std::optional<std::size_t> select(std::span<const Item> queue, const CompatibilityGraph& graph, Key key,
                                  Better better) {
  std::optional<std::size_t> best;
  double best_key = 0.0;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    if (!graph.matchable(queue[i].cls)) continue;
    const double k = key(queue[i]);
    if (!best || better(k, best_key)) {
      best = i;
      best_key = k;
    }
  }
  return best;
}

bool lower(double a, double b) { return a < b; }
bool higher(double a, double b) { return a > b; }

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Edf: return "EDF";
    case PolicyKind::Esdf: return "ESDF";
    case PolicyKind::Score: return "SCORE";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view text) {
  for (PolicyKind k : kPolicyKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

ScoreParams ScoreParams::scaled(double factor) const {
  ScoreParams out = *this;
  for (double& b : out.meld_base) b *= factor;
  for (double& s : out.wait_slope) s *= factor;
  out.mxp_bonus *= factor;
  return out;
}

void validate(const ScoreParams& params) {
  auto ok = [](double v) { return v >= 0.0 && std::isfinite(v); };
  for (double b : params.meld_base) {
    if (!ok(b)) throw std::invalid_argument("score MELD base points must be finite and >= 0");
  }
  for (double s : params.wait_slope) {
    if (!ok(s)) throw std::invalid_argument("score waiting-time slopes must be finite and >= 0");
  }
  if (!ok(params.mxp_bonus)) throw std::invalid_argument("score MXP bonus must be finite and >= 0");
}

double score(const ScoreParams& params, const RecipientClass& rc, Years waiting_time) {
  double s = params.meld_base[index_of(rc.meld)] + params.wait_slope[index_of(rc.indication)] * waiting_time;
  if (rc.indication == Indication::Mxp) s += params.mxp_bonus;
  return s;
}

std::optional<std::size_t> choose_match(PolicyKind kind, std::span<const Item> queue, const Item& incoming,
                                        const CompatibilityGraph& graph, const ScoreParams& params) {
  if (!incoming.cls.is_donor()) throw std::logic_error("choose_match: incoming item must be a donor");
  switch (kind) {
    case PolicyKind::Edf:
      return select(queue, graph, [](const Item& it) { return it.real_patience; }, lower);
    case PolicyKind::Esdf:
      return select(queue, graph, [](const Item& it) { return it.predictive_patience; }, lower);
    case PolicyKind::Score:
      return select(
          queue, graph,
          [&params](const Item& it) { return score(params, it.cls.recipient_class(), it.waiting_time); }, higher);
  }
  return std::nullopt;
}

}  // namespace rtmatch
