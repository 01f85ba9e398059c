#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace freedst {

enum class Speaker { User, System };

std::string_view speaker_name(Speaker s);  // "user" / "system"

struct Turn {
  Speaker speaker = Speaker::User;
  std::string text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

/// Conversation context up to the current turn. Value type; operations return new contexts.
struct DialogueContext {
  std::string dialogue_id;
  std::vector<Turn> turns;

  /// Turn index t: the number of user turns seen so far.
  std::size_t turn_index() const;

  friend bool operator==(const DialogueContext&, const DialogueContext&) = default;
};

/// Sentinel the model emits when a slot has no value in the dialogue.
inline constexpr std::string_view kNoneValue = "NONE";

/// Case-fold (ASCII), trim, and collapse internal whitespace runs to one space.
/// Any case variant of "none" maps to the sentinel kNoneValue.
std::string normalize_text(std::string_view text);
std::string normalize_value(std::string_view text);

/// One <domain, slot, value> unit, stored normalised.
class StateTriple {
 public:
  StateTriple() = default;
  /// Normalises its arguments. Throws Errc::EmptyInput if domain or slot is empty afterwards.
  StateTriple(std::string_view domain, std::string_view slot, std::string_view value);

  const std::string& domain() const { return domain_; }
  const std::string& slot() const { return slot_; }
  const std::string& value() const { return value_; }
  bool is_none() const { return value_ == kNoneValue; }

  friend auto operator<=>(const StateTriple&, const StateTriple&) = default;
  friend bool operator==(const StateTriple&, const StateTriple&) = default;

 private:
  std::string domain_;
  std::string slot_;
  std::string value_;
};

using SlotKey = std::pair<std::string, std::string>;  // (domain, slot)

/// Set of triples with at most one value per (domain, slot).
class DialogueState {
 public:
  DialogueState() = default;
  DialogueState(std::initializer_list<StateTriple> triples);

  /// Inserts or overwrites the value for the triple's key.
  void set(const StateTriple& t);
  bool erase(const SlotKey& key);
  std::optional<std::string> value_of(const SlotKey& key) const;
  bool contains(const StateTriple& t) const;

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  /// Triples in (domain, slot) order.
  std::vector<StateTriple> triples() const;
  const std::map<SlotKey, std::string>& entries() const { return values_; }

  /// Copy without sentinel-valued triples.
  DialogueState without_none() const;

  friend bool operator==(const DialogueState&, const DialogueState&) = default;

 private:
  std::map<SlotKey, std::string> values_;
};

/// Returns ctx with turn appended. Throws Errc::EmptyUtterance for blank text.
DialogueContext append_turn(const DialogueContext& ctx, Turn turn);

std::string render_turn(const Turn& turn);

/// One "USER: ..." / "SYSTEM: ..." line per turn, newline separated.
std::string serialize_context(const DialogueContext& ctx);

/// Latest value wins per key; sentinel values never enter the result.
DialogueState accumulate_state(const DialogueState& prev, std::span<const StateTriple> new_triples);

}  // namespace freedst
