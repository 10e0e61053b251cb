#pragma once

// Class space of the liver-allocation matching model: one donor class and
// 27 recipient classes built from (indication, MELD band, awaits-exception).

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace rtmatch {

enum class Indication : std::uint8_t { Cirrh = 0, Hcc = 1, Mxp = 2, Other = 3 };

inline constexpr std::size_t kIndicationCount = 4;
inline constexpr std::array<Indication, kIndicationCount> kIndications = {
    Indication::Cirrh, Indication::Hcc, Indication::Mxp, Indication::Other};

enum class MeldBand : std::uint8_t { B1 = 0, B2, B3, B4, B5, B6 };

inline constexpr std::size_t kMeldBandCount = 6;
inline constexpr std::array<MeldBand, kMeldBandCount> kMeldBands = {
    MeldBand::B1, MeldBand::B2, MeldBand::B3, MeldBand::B4, MeldBand::B5, MeldBand::B6};

struct MeldRange {
  int lower;
  int upper;
};

constexpr MeldRange meld_range(MeldBand band) {
  constexpr std::array<MeldRange, kMeldBandCount> ranges = {
      {{6, 14}, {15, 19}, {20, 25}, {26, 30}, {31, 35}, {36, 40}}};
  return ranges[static_cast<std::size_t>(band)];
}

constexpr std::size_t index_of(Indication i) { return static_cast<std::size_t>(i); }
constexpr std::size_t index_of(MeldBand b) { return static_cast<std::size_t>(b); }

std::string_view to_string(Indication indication);
std::string meld_label(MeldBand band);  // "[6,14]"
std::optional<Indication> parse_indication(std::string_view text);

/// The (indication, MELD band, awaits-exception) triplet.
struct RecipientClass {
  Indication indication = Indication::Cirrh;
  MeldBand meld = MeldBand::B1;
  bool awaits_mxp = false;

  friend constexpr bool operator==(const RecipientClass&, const RecipientClass&) = default;
};

/// True iff the triplet is one of the 27 admissible recipient classes.
constexpr bool is_valid(const RecipientClass& rc) {
  const bool low_band = rc.meld <= MeldBand::B3;
  switch (rc.indication) {
    case Indication::Mxp:
      return low_band && !rc.awaits_mxp;
    case Indication::Hcc:
      return !rc.awaits_mxp;
    case Indication::Cirrh:
    case Indication::Other:
      return !rc.awaits_mxp || low_band;
  }
  return false;
}

inline constexpr std::size_t kRecipientClassCount = 27;
inline constexpr std::size_t kClassCount = kRecipientClassCount + 1;

namespace detail {
constexpr std::array<RecipientClass, kRecipientClassCount> make_recipient_table() {
  std::array<RecipientClass, kRecipientClassCount> table{};
  std::size_t n = 0;
  for (Indication ind : kIndications) {
    for (MeldBand band : kMeldBands) {
      for (bool awaits : {false, true}) {
        const RecipientClass rc{ind, band, awaits};
        if (is_valid(rc)) table[n++] = rc;
      }
    }
  }
  return table;
}
}  // namespace detail

/// Recipient classes in canonical order: indication (CIRRH < HCC < MXP < OTHER),
/// then MELD band ascending, then awaits flag (false < true).
inline constexpr std::array<RecipientClass, kRecipientClassCount> kRecipientClasses =
    detail::make_recipient_table();

/// Dense class identifier. Index 0 is the donor class; indices 1..27 follow
/// the canonical recipient order. Trivially copyable and cheap to compare.
class ClassId {
 public:
  constexpr ClassId() = default;

  static constexpr ClassId donor() { return ClassId(0); }
  /// Throws std::invalid_argument for an inadmissible triplet.
  static ClassId recipient(const RecipientClass& rc);
  static constexpr ClassId from_index(std::size_t index) {
    return ClassId(static_cast<std::uint8_t>(index));
  }

  constexpr bool is_donor() const { return index_ == 0; }
  constexpr bool is_recipient() const { return index_ != 0; }
  constexpr std::size_t index() const { return index_; }

  /// Precondition: is_recipient().
  constexpr const RecipientClass& recipient_class() const { return kRecipientClasses[index_ - 1]; }

  friend constexpr auto operator<=>(const ClassId&, const ClassId&) = default;

 private:
  constexpr explicit ClassId(std::uint8_t index) : index_(index) {}
  std::uint8_t index_ = 0;
};

/// All 28 classes: donor first, then the recipients in canonical order.
std::array<ClassId, kClassCount> enumerate_classes();

/// Stable text form, e.g. "DONOR", "CIRRH/[6,14]", "OTHER/[15,19]/awaiting".
std::string to_string(ClassId id);
std::optional<ClassId> parse_class(std::string_view text);

/// Bipartite compatibility graph E = R1 x D: the donor class is compatible with
/// every recipient class that is not awaiting a MELD exception.
class CompatibilityGraph {
 public:
  CompatibilityGraph();

  /// Throws std::invalid_argument if `donor` is not the donor class or
  /// `recipient` is not a recipient class.
  bool is_compatible(ClassId donor, ClassId recipient) const;

  /// Hot-path lookup without argument checks; `recipient` may be any class.
  bool matchable(ClassId recipient) const { return matchable_[recipient.index()]; }

  std::size_t edge_count() const;

 private:
  std::array<bool, kClassCount> matchable_{};
};

}  // namespace rtmatch
