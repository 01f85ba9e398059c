#include "freedst/dialogue_model.hpp"

#include <algorithm>
#include <cctype>

#include "freedst/error.hpp"

namespace freedst {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::EmptyUtterance: return "empty-utterance";
    case Errc::EmptyInstruction: return "empty-instruction";
    case Errc::EmptyInput: return "empty-input";
    case Errc::NonPersonaKind: return "non-persona-kind";
    case Errc::TemplateFormat: return "template-format";
    case Errc::NetworkTimeout: return "network-timeout";
    case Errc::RateLimited: return "rate-limited";
    case Errc::MalformedResponse: return "malformed-response";
    case Errc::ReplayMiss: return "replay-miss";
    case Errc::StorageIo: return "storage-io";
    case Errc::BackendConfig: return "backend-config";
    case Errc::EmptySequence: return "empty-sequence";
    case Errc::NoGoldSlots: return "no-gold-slots";
    case Errc::TooFewEdges: return "too-few-edges";
    case Errc::BadFractions: return "bad-fractions";
    case Errc::InsufficientNegatives: return "insufficient-negatives";
    case Errc::NonSquare: return "non-square";
    case Errc::DimensionMismatch: return "dimension-mismatch";
    case Errc::IndexOutOfRange: return "index-out-of-range";
    case Errc::EmptyTrainSet: return "empty-train-set";
    case Errc::Diverged: return "diverged";
    case Errc::Checkpoint: return "checkpoint";
    case Errc::DegenerateLabels: return "degenerate-labels";
    case Errc::NoPositives: return "no-positives";
    case Errc::EmptyContext: return "empty-context";
    case Errc::UnreadableFile: return "unreadable-file";
    case Errc::UnknownFormat: return "unknown-format";
    case Errc::ZeroValidDialogues: return "zero-valid-dialogues";
    case Errc::IoError: return "io-error";
    case Errc::TooFewItems: return "too-few-items";
    case Errc::IdMismatch: return "id-mismatch";
    case Errc::Config: return "config";
  }
  return "unknown";
}

bool is_backend_error(Errc code) {
  return code == Errc::NetworkTimeout || code == Errc::RateLimited ||
         code == Errc::MalformedResponse || code == Errc::ReplayMiss;
}

std::string_view speaker_name(Speaker s) { return s == Speaker::User ? "user" : "system"; }

std::size_t DialogueContext::turn_index() const {
  return static_cast<std::size_t>(
      std::count_if(turns.begin(), turns.end(), [](const Turn& t) { return t.speaker == Speaker::User; }));
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    // ASCII-only folding leaves UTF-8 multibyte sequences untouched.
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string normalize_value(std::string_view text) {
  std::string v = normalize_text(text);
  if (v == "none") return std::string(kNoneValue);
  return v;
}

StateTriple::StateTriple(std::string_view domain, std::string_view slot, std::string_view value)
    : domain_(normalize_text(domain)), slot_(normalize_text(slot)), value_(normalize_value(value)) {
  if (domain_.empty() || slot_.empty()) {
    throw Error(Errc::EmptyInput, "state triple needs a non-empty domain and slot");
  }
}

DialogueState::DialogueState(std::initializer_list<StateTriple> triples) {
  for (const auto& t : triples) set(t);
}

void DialogueState::set(const StateTriple& t) { values_[{t.domain(), t.slot()}] = t.value(); }

bool DialogueState::erase(const SlotKey& key) { return values_.erase(key) > 0; }

std::optional<std::string> DialogueState::value_of(const SlotKey& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

bool DialogueState::contains(const StateTriple& t) const {
  auto it = values_.find({t.domain(), t.slot()});
  return it != values_.end() && it->second == t.value();
}

std::vector<StateTriple> DialogueState::triples() const {
  std::vector<StateTriple> out;
  out.reserve(values_.size());
  for (const auto& [key, value] : values_) out.emplace_back(key.first, key.second, value);
  return out;
}

DialogueState DialogueState::without_none() const {
  DialogueState out;
  for (const auto& [key, value] : values_) {
    if (value != kNoneValue) out.values_.emplace(key, value);
  }
  return out;
}

DialogueContext append_turn(const DialogueContext& ctx, Turn turn) {
  if (normalize_text(turn.text).empty()) {
    throw Error(Errc::EmptyUtterance, "cannot append an empty utterance to dialogue '" + ctx.dialogue_id + "'");
  }
  DialogueContext out = ctx;
  out.turns.push_back(std::move(turn));
  return out;
}

std::string render_turn(const Turn& turn) {
  std::string line = (turn.speaker == Speaker::User ? "USER: " : "SYSTEM: ") + turn.text;
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::replace(line.begin(), line.end(), '\r', ' ');
  return line;
}

std::string serialize_context(const DialogueContext& ctx) {
  std::string out;
  for (std::size_t i = 0; i < ctx.turns.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += render_turn(ctx.turns[i]);
  }
  return out;
}

DialogueState accumulate_state(const DialogueState& prev, std::span<const StateTriple> new_triples) {
  DialogueState out = prev.without_none();
  for (const auto& t : new_triples) {
    if (!t.is_none()) out.set(t);
  }
  return out;
}

}  // namespace freedst
