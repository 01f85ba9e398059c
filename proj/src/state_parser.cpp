#include "freedst/state_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "freedst/error.hpp"

namespace freedst {

std::string_view diagnostic_kind_name(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::ParseFailure: return "parse_failure";
    case DiagnosticKind::ListLengthMismatch: return "list_length_mismatch";
    case DiagnosticKind::EmptyField: return "empty_field";
  }
  return "parse_failure";
}

DiagnosticKind parse_diagnostic_kind(std::string_view name) {
  for (auto k : {DiagnosticKind::ParseFailure, DiagnosticKind::ListLengthMismatch, DiagnosticKind::EmptyField}) {
    if (diagnostic_kind_name(k) == name) return k;
  }
  throw Error(Errc::Config, "unknown diagnostic kind '" + std::string(name) + "'");
}

bool ParseOutcome::failed() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.kind == DiagnosticKind::ParseFailure; });
}

namespace {

enum class Field { Domain = 0, Slot = 1, Value = 2 };

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct Quote {
  std::size_t length = 0;  // bytes of the opening quote
  bool is_double = false;
};

// Recognises ' " ` and the typographic single/double quotes.
std::optional<Quote> opening_quote(std::string_view s, std::size_t i) {
  if (i >= s.size()) return std::nullopt;
  const char c = s[i];
  if (c == '\'' || c == '`') return Quote{1, false};
  if (c == '"') return Quote{1, true};
  if (s.substr(i, 3) == "\xE2\x80\x98" || s.substr(i, 3) == "\xE2\x80\x99") return Quote{3, false};
  if (s.substr(i, 3) == "\xE2\x80\x9C" || s.substr(i, 3) == "\xE2\x80\x9D") return Quote{3, true};
  return std::nullopt;
}

// Length of a closing quote of the right family at i, or 0.
std::size_t closing_quote(std::string_view s, std::size_t i, bool is_double) {
  if (i >= s.size()) return 0;
  if (is_double) {
    if (s[i] == '"') return 1;
    if (s.substr(i, 3) == "\xE2\x80\x9D" || s.substr(i, 3) == "\xE2\x80\x9C") return 3;
  } else {
    if (s[i] == '\'' || s[i] == '`') return 1;
    if (s.substr(i, 3) == "\xE2\x80\x99" || s.substr(i, 3) == "\xE2\x80\x98") return 3;
  }
  return 0;
}

std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && is_space(s[i])) ++i;
  return i;
}

// Parses a bracketed list whose '[' is at `open`. Returns items and the index past ']'.
std::optional<std::pair<std::vector<std::string>, std::size_t>> parse_list(std::string_view s, std::size_t open) {
  const std::size_t close_bracket = s.find(']', open + 1);
  if (close_bracket == std::string_view::npos) return std::nullopt;

  std::vector<std::string> items;
  std::size_t i = open + 1;
  while (true) {
    while (i < s.size() && (is_space(s[i]) || s[i] == ',')) ++i;
    if (i >= s.size()) return std::nullopt;
    if (s[i] == ']') return std::make_pair(std::move(items), i + 1);

    if (auto q = opening_quote(s, i)) {
      // The closing quote is the first one followed by optional space and ',' or ']'.
      std::size_t j = i + q->length;
      bool found = false;
      while (j < s.size()) {
        const std::size_t ql = closing_quote(s, j, q->is_double);
        if (ql > 0) {
          const std::size_t k = skip_space(s, j + ql);
          if (k < s.size() && (s[k] == ',' || s[k] == ']')) {
            items.emplace_back(s.substr(i + q->length, j - i - q->length));
            i = k;
            found = true;
            break;
          }
          j += ql;
        } else {
          ++j;
        }
      }
      if (found) continue;
      // Unterminated quote: fall through and read the rest as a bare item.
    }
    std::size_t j = i;
    while (j < s.size() && s[j] != ',' && s[j] != ']') ++j;
    if (j >= s.size()) return std::nullopt;
    items.emplace_back(s.substr(i, j - i));
    i = j;
  }
}

struct LabelledList {
  Field field;
  std::vector<std::string> items;
};

// Finds the next "<label> [:] [" at or after `from`. Returns field and '[' position.
std::optional<std::pair<Field, std::size_t>> next_label(std::string_view s, std::size_t from,
                                                        std::size_t* label_end) {
  static constexpr std::array<std::pair<std::string_view, Field>, 3> labels = {{
      {"domain", Field::Domain}, {"slot", Field::Slot}, {"value", Field::Value}}};
  for (std::size_t i = from; i < s.size(); ++i) {
    if (i > 0 && is_alnum(s[i - 1])) continue;
    for (const auto& [word, field] : labels) {
      if (i + word.size() > s.size()) continue;
      bool match = true;
      for (std::size_t k = 0; k < word.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(s[i + k])) != word[k]) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      std::size_t j = i + word.size();
      if (j < s.size() && (s[j] == 's' || s[j] == 'S')) ++j;  // plural labels
      if (j < s.size() && is_alnum(s[j])) continue;
      j = skip_space(s, j);
      if (j < s.size() && (s[j] == ':' || s[j] == '=')) j = skip_space(s, j + 1);
      if (j < s.size() && s[j] == '[') {
        *label_end = j;
        return std::make_pair(field, j);
      }
    }
  }
  return std::nullopt;
}

std::string quote_item(const std::string& item) {
  const char q = item.find('\'') == std::string::npos ? '\'' : '"';
  return std::string(1, q) + item + std::string(1, q);
}

std::string render_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += quote_item(items[i]);
  }
  return out + "]";
}

}  // namespace

ParseOutcome parse_state(std::string_view text) {
  ParseOutcome outcome;
  std::vector<LabelledList> lists;
  std::size_t pos = 0;
  std::size_t bracket = 0;
  while (auto found = next_label(text, pos, &bracket)) {
    auto parsed = parse_list(text, found->second);
    if (!parsed) {
      pos = found->second + 1;
      continue;
    }
    lists.push_back({found->first, std::move(parsed->first)});
    pos = parsed->second;
  }

  // Group lists into (domain, slot, value) triples of lists; a repeated field starts a new group.
  using Group = std::array<std::optional<std::vector<std::string>>, 3>;
  std::vector<Group> groups;
  Group current;
  std::size_t incomplete = 0;
  auto close_group = [&] {
    const bool any = current[0] || current[1] || current[2];
    if (current[0] && current[1] && current[2]) {
      groups.push_back(std::move(current));
    } else if (any) {
      ++incomplete;
    }
    current = Group{};
  };
  for (auto& l : lists) {
    auto& slot = current[static_cast<std::size_t>(l.field)];
    if (slot) close_group();
    current[static_cast<std::size_t>(l.field)] = std::move(l.items);
    if (current[0] && current[1] && current[2]) close_group();
  }
  close_group();

  if (groups.empty()) {
    outcome.diagnostics.push_back(
        {DiagnosticKind::ParseFailure,
         lists.empty() ? "no Domain/Slot/Value lists found" : "no complete Domain/Slot/Value group found"});
    return outcome;
  }
  if (incomplete > 0) {
    outcome.diagnostics.push_back({DiagnosticKind::ListLengthMismatch,
                                   std::to_string(incomplete) + " incomplete Domain/Slot/Value group(s) ignored"});
  }

  for (const auto& g : groups) {
    const auto& domains = *g[0];
    const auto& slots = *g[1];
    const auto& values = *g[2];
    const bool broadcast = domains.size() == 1;
    std::size_t n = std::min(slots.size(), values.size());
    if (!broadcast) n = std::min(n, domains.size());
    if (slots.size() != values.size() || (!broadcast && domains.size() != slots.size())) {
      std::ostringstream os;
      os << "list lengths domain=" << domains.size() << " slot=" << slots.size() << " value=" << values.size()
         << "; zipped " << n;
      outcome.diagnostics.push_back({DiagnosticKind::ListLengthMismatch, os.str()});
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::string d = normalize_text(broadcast ? domains[0] : domains[i]);
      const std::string s = normalize_text(slots[i]);
      const std::string v = normalize_value(values[i]);
      if (d.empty() || s.empty() || v.empty()) {
        outcome.diagnostics.push_back({DiagnosticKind::EmptyField,
                                       "empty field in item " + std::to_string(i) + " ('" + d + "', '" + s +
                                           "', '" + v + "')"});
        continue;
      }
      outcome.state.set(StateTriple(d, s, v));
    }
  }
  return outcome;
}

std::string format_state(const DialogueState& state) {
  if (state.empty()) return "Domain : [] , Slot : [] , Value : []";
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> by_domain;
  for (const auto& [key, value] : state.entries()) {
    auto& entry = by_domain[key.first];
    entry.first.push_back(key.second);
    entry.second.push_back(value);
  }
  std::string out;
  for (const auto& [domain, lists] : by_domain) {
    if (!out.empty()) out.push_back('\n');
    out += "Domain : " + render_list({domain}) + " , Slot : " + render_list(lists.first) +
           " , Value : " + render_list(lists.second);
  }
  return out;
}

StateTriple normalize_triple(const StateTriple& t) { return StateTriple(t.domain(), t.slot(), t.value()); }

StateTriple normalize_triple(std::string_view domain, std::string_view slot, std::string_view value) {
  return StateTriple(domain, slot, value);
}

ErrorReport& ErrorReport::operator+=(const ErrorReport& other) {
  nonexistent_value_count += other.nonexistent_value_count;
  synonym_count += other.synonym_count;
  total_errors += other.total_errors;
  samples.insert(samples.end(), other.samples.begin(), other.samples.end());
  return *this;
}

JunkPatterns JunkPatterns::defaults() {
  return JunkPatterns{{"general", "unknown", "null", "n/a", "na", "nan", "value", "placeholder", "xxx", "tbd"}};
}

bool is_junk_value(std::string_view value, const JunkPatterns& junk) {
  const std::string v = normalize_text(value);
  if (v.empty()) return true;
  if (std::all_of(v.begin(), v.end(), [](char c) { return std::ispunct(static_cast<unsigned char>(c)) || c == ' '; })) {
    return true;
  }
  const auto first = static_cast<unsigned char>(v.front());
  if (v.size() >= 3 && first < 0x80 && !std::isdigit(first) &&
      std::all_of(v.begin(), v.end(), [&](char c) { return c == v.front(); })) {
    return true;
  }
  return std::find(junk.placeholders.begin(), junk.placeholders.end(), v) != junk.placeholders.end();
}

namespace {

std::set<std::string> tokens(const std::string& s) {
  std::set<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.insert(tok);
  return out;
}

bool nested_tokens(const std::string& a, const std::string& b) {
  const auto ta = tokens(a);
  const auto tb = tokens(b);
  if (ta.empty() || tb.empty() || ta == tb) return false;
  return std::includes(ta.begin(), ta.end(), tb.begin(), tb.end()) ||
         std::includes(tb.begin(), tb.end(), ta.begin(), ta.end());
}

}  // namespace

ErrorReport classify_errors(const DialogueState& pred, const DialogueState& gold,
                            const std::vector<std::string>& dialogue_text, const JunkPatterns& junk) {
  ErrorReport report;
  std::vector<std::string> context;
  context.reserve(dialogue_text.size());
  for (const auto& t : dialogue_text) context.push_back(normalize_text(t));

  const DialogueState p = pred.without_none();
  const DialogueState g = gold.without_none();

  for (const auto& [key, value] : p.entries()) {
    const auto gold_value = g.value_of(key);
    if (gold_value && *gold_value == value) continue;
    ++report.total_errors;
    ErrorSample sample{key.first, key.second, value, gold_value.value_or(""), "unclassified"};
    const bool absent_from_context =
        !context.empty() && std::none_of(context.begin(), context.end(), [&](const std::string& turn) {
          return turn.find(value) != std::string::npos;
        });
    if (is_junk_value(value, junk) || absent_from_context) {
      ++report.nonexistent_value_count;
      sample.kind = "nonexistent_value";
    } else if (gold_value && nested_tokens(*gold_value, value)) {
      ++report.synonym_count;
      sample.kind = "synonym";
    }
    report.samples.push_back(std::move(sample));
  }
  for (const auto& [key, value] : g.entries()) {
    if (p.value_of(key)) continue;
    ++report.total_errors;
    report.samples.push_back({key.first, key.second, "", value, "missed"});
  }
  return report;
}

}  // namespace freedst
