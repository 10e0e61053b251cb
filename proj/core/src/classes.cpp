#include "rtmatch/classes.hpp"

#include <stdexcept>

namespace rtmatch {

std::string_view to_string(Indication indication) {
  switch (indication) {
    case Indication::Cirrh: return "CIRRH";
    case Indication::Hcc: return "HCC";
    case Indication::Mxp: return "MXP";
    case Indication::Other: return "OTHER";
  }
  return "?";
}

std::string meld_label(MeldBand band) {
  const MeldRange r = meld_range(band);
  return "[" + std::to_string(r.lower) + "," + std::to_string(r.upper) + "]";
}

std::optional<Indication> parse_indication(std::string_view text) {
  for (Indication ind : kIndications) {
    if (to_string(ind) == text) return ind;
  }
  return std::nullopt;
}

ClassId ClassId::recipient(const RecipientClass& rc) {
  for (std::size_t i = 0; i < kRecipientClasses.size(); ++i) {
    if (kRecipientClasses[i] == rc) return ClassId(static_cast<std::uint8_t>(i + 1));
  }
  throw std::invalid_argument("inadmissible recipient class " + std::string(to_string(rc.indication)) +
                              "/" + meld_label(rc.meld) + (rc.awaits_mxp ? "/awaiting" : ""));
}

std::array<ClassId, kClassCount> enumerate_classes() {
  std::array<ClassId, kClassCount> out{};
  for (std::size_t i = 0; i < kClassCount; ++i) out[i] = ClassId::from_index(i);
  return out;
}

std::string to_string(ClassId id) {
  if (id.is_donor()) return "DONOR";
  const RecipientClass& rc = id.recipient_class();
  std::string s(to_string(rc.indication));
  s += "/";
  s += meld_label(rc.meld);
  if (rc.awaits_mxp) s += "/awaiting";
  return s;
}

std::optional<ClassId> parse_class(std::string_view text) {
  for (ClassId id : enumerate_classes()) {
    if (to_string(id) == text) return id;
  }
  return std::nullopt;
}

CompatibilityGraph::CompatibilityGraph() {
  for (std::size_t i = 1; i < kClassCount; ++i) {
    matchable_[i] = !ClassId::from_index(i).recipient_class().awaits_mxp;
  }
}

bool CompatibilityGraph::is_compatible(ClassId donor, ClassId recipient) const {
  if (!donor.is_donor()) throw std::invalid_argument("is_compatible: first argument must be the donor class");
  if (!recipient.is_recipient()) {
    throw std::invalid_argument("is_compatible: second argument must be a recipient class");
  }
  return matchable_[recipient.index()];
}

std::size_t CompatibilityGraph::edge_count() const {
  std::size_t n = 0;
  for (bool m : matchable_) n += m ? 1 : 0;
  return n;
}

}  // namespace rtmatch
