#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "freedst/dialogue_model.hpp"

namespace freedst {

enum class DiagnosticKind { ParseFailure, ListLengthMismatch, EmptyField };

std::string_view diagnostic_kind_name(DiagnosticKind k);  // "parse_failure", ...
DiagnosticKind parse_diagnostic_kind(std::string_view name);

struct Diagnostic {
  DiagnosticKind kind;
  std::string detail;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct ParseOutcome {
  DialogueState state;
  std::vector<Diagnostic> diagnostics;

  bool failed() const;
};

/// Extracts every `Domain : [...] Slot : [...] Value : [...]` group from model output.
/// Labels are case-insensitive; items may be quoted with ', ", ` or typographic quotes,
/// or left bare. A single domain broadcasts over the slot/value lists. Never throws.
ParseOutcome parse_state(std::string_view text);

/// Canonical rendering of a state in the same format; parse_state inverts it.
/// Triples of one domain share a singleton domain list; multi-domain states use one
/// group per domain, separated by newlines. An empty state renders empty lists.
std::string format_state(const DialogueState& state);

StateTriple normalize_triple(const StateTriple& t);
/// Same normalisation on raw strings (no validation); useful before a StateTriple exists.
StateTriple normalize_triple(std::string_view domain, std::string_view slot, std::string_view value);

struct ErrorSample {
  std::string domain;
  std::string slot;
  std::string predicted;
  std::string gold;  // empty when the key is absent from gold
  std::string kind;  // "nonexistent_value", "synonym", "unclassified", "missed"
};

struct ErrorReport {
  long nonexistent_value_count = 0;
  long synonym_count = 0;
  long total_errors = 0;
  std::vector<ErrorSample> samples;

  ErrorReport& operator+=(const ErrorReport& other);
};

/// Junk-value rules for the non-existent-value class.
struct JunkPatterns {
  std::vector<std::string> placeholders;  // exact normalised values counted as junk
  static JunkPatterns defaults();
};

bool is_junk_value(std::string_view value, const JunkPatterns& junk);

/// Classifies wrong predicted values against gold.
///
/// A predicted triple whose value differs from gold (or whose key is absent from gold) is:
///   nonexistent_value - junk (punctuation-only, one repeated character, placeholder) or,
///                       when `dialogue_text` is non-empty, not a substring of any turn;
///   synonym           - gold and predicted token sets are nested (e.g. "5 nights" / "5");
///   unclassified      - otherwise.
/// Gold keys with no prediction add to total_errors as "missed". Sentinel values are ignored.
ErrorReport classify_errors(const DialogueState& pred, const DialogueState& gold,
                            const std::vector<std::string>& dialogue_text = {},
                            const JunkPatterns& junk = JunkPatterns::defaults());

}  // namespace freedst
