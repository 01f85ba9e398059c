#include "freedst/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace freedst {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string dump_line(const ojson& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

struct BadRecord : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Speaker parse_speaker(const std::string& s) {
  const std::string n = normalize_text(s);
  if (n == "user") return Speaker::User;
  if (n == "system") return Speaker::System;
  throw BadRecord("unknown speaker '" + s + "'");
}

Turn make_turn(Speaker sp, const std::string& text) {
  if (normalize_text(text).empty()) throw BadRecord("empty turn text");
  return {sp, text};
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw Error(Errc::UnreadableFile, "read failed for " + path.string());
  return os.str();
}

json parse_whole(const std::filesystem::path& path) {
  try {
    return json::parse(read_all(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::UnreadableFile, path.string() + " is not valid JSON: " + e.what());
  }
}

void check_gold_length(const AnnotatedDialogue& d) {
  if (d.gold_states && d.gold_states->size() != d.user_turn_count()) {
    throw BadRecord("gold has " + std::to_string(d.gold_states->size()) + " states for " +
                    std::to_string(d.user_turn_count()) + " user turns");
  }
}

AnnotatedDialogue plain_record(const json& j) {
  if (!j.is_object()) throw BadRecord("record is not an object");
  AnnotatedDialogue d;
  d.dialogue_id = j.at("dialogue_id").get<std::string>();
  if (d.dialogue_id.empty()) throw BadRecord("empty dialogue_id");
  for (const auto& t : j.at("turns")) {
    d.turns.push_back(make_turn(parse_speaker(t.at("speaker").get<std::string>()), t.at("text").get<std::string>()));
  }
  if (auto it = j.find("gold"); it != j.end() && !it->is_null()) {
    std::vector<DialogueState> gold;
    for (const auto& s : *it) gold.push_back(state_from_json(s).without_none());
    d.gold_states = std::move(gold);
  }
  check_gold_length(d);
  return d;
}

void load_plain(const std::filesystem::path& path, LoadResult& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    try {
      out.dialogues.push_back(plain_record(json::parse(line)));
    } catch (const std::exception& e) {
      ++out.skipped;
      out.warnings.push_back(path.filename().string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

bool multiwoz_skip_value(const std::string& v) {
  const std::string n = normalize_text(v);
  return n.empty() || n == "not mentioned" || n == "none";
}

// MultiWOZ metadata is already cumulative: {domain: {semi: {...}, book: {...}}}.
DialogueState multiwoz_state(const json& metadata) {
  DialogueState s;
  for (const auto& [domain, body] : metadata.items()) {
    if (!body.is_object()) continue;
    if (auto semi = body.find("semi"); semi != body.end()) {
      for (const auto& [slot, v] : semi->items()) {
        if (v.is_string() && !multiwoz_skip_value(v.get<std::string>())) s.set({domain, slot, v.get<std::string>()});
      }
    }
    if (auto book = body.find("book"); book != body.end()) {
      for (const auto& [slot, v] : book->items()) {
        // "booked" is a list of reservation records, not a user goal.
        if (v.is_string() && !multiwoz_skip_value(v.get<std::string>())) {
          s.set({domain, "book " + slot, v.get<std::string>()});
        }
      }
    }
  }
  return s.without_none();
}

AnnotatedDialogue multiwoz_record(const std::string& id, const json& body) {
  AnnotatedDialogue d;
  d.dialogue_id = id;
  const auto& log = body.at("log");
  if (!log.is_array() || log.empty()) throw BadRecord("empty or missing log");
  std::vector<DialogueState> gold;
  bool annotated = false;
  for (std::size_t k = 0; k < log.size(); ++k) {
    const Speaker sp = k % 2 == 0 ? Speaker::User : Speaker::System;
    d.turns.push_back(make_turn(sp, log[k].at("text").get<std::string>()));
    if (sp == Speaker::User) {
      // The belief state after a user turn is recorded on the following system turn.
      DialogueState s = gold.empty() ? DialogueState{} : gold.back();
      if (k + 1 < log.size()) {
        const auto& meta = log[k + 1].find("metadata");
        if (meta != log[k + 1].end() && meta->is_object() && !meta->empty()) {
          s = multiwoz_state(*meta);
          annotated = true;
        }
      }
      gold.push_back(std::move(s));
    }
  }
  if (annotated) d.gold_states = std::move(gold);
  return d;
}

void load_multiwoz(const std::filesystem::path& path, LoadResult& out) {
  const json root = parse_whole(path);
  if (!root.is_object()) throw Error(Errc::UnknownFormat, path.string() + ": expected an object keyed by dialogue id");
  for (const auto& [id, body] : root.items()) {
    try {
      out.dialogues.push_back(multiwoz_record(id, body));
    } catch (const std::exception& e) {
      ++out.skipped;
      out.warnings.push_back(path.filename().string() + ": " + id + ": " + e.what());
    }
  }
}

}  // namespace

std::string sgd_service_domain(const std::string& service) {
  std::string s = service;
  const auto us = s.rfind('_');
  if (us != std::string::npos && us + 1 < s.size() &&
      std::all_of(s.begin() + static_cast<std::ptrdiff_t>(us + 1), s.end(),
                  [](unsigned char c) { return std::isdigit(c); })) {
    s.erase(us);
  }
  return normalize_text(s);
}

namespace {

AnnotatedDialogue sgd_record(const json& j) {
  AnnotatedDialogue d;
  d.dialogue_id = j.at("dialogue_id").get<std::string>();
  if (d.dialogue_id.empty()) throw BadRecord("empty dialogue_id");
  std::map<std::string, DialogueState> per_service;  // carried forward across turns
  std::vector<DialogueState> gold;
  bool annotated = false;
  for (const auto& t : j.at("turns")) {
    const Speaker sp = parse_speaker(t.at("speaker").get<std::string>());
    d.turns.push_back(make_turn(sp, t.at("utterance").get<std::string>()));
    if (sp != Speaker::User) continue;
    if (auto frames = t.find("frames"); frames != t.end()) {
      for (const auto& f : *frames) {
        auto st = f.find("state");
        if (st == f.end()) continue;
        annotated = true;
        const std::string domain = sgd_service_domain(f.at("service").get<std::string>());
        DialogueState s;
        for (const auto& [slot, values] : st->at("slot_values").items()) {
          if (values.is_array() && !values.empty()) s.set({domain, slot, values.front().get<std::string>()});
        }
        per_service[domain] = s.without_none();
      }
    }
    DialogueState merged;
    for (const auto& [_, s] : per_service) {
      for (const auto& tr : s.triples()) merged.set(tr);
    }
    gold.push_back(std::move(merged));
  }
  if (annotated) d.gold_states = std::move(gold);
  return d;
}

void load_sgd(const std::filesystem::path& path, LoadResult& out) {
  const json root = parse_whole(path);
  if (!root.is_array()) throw Error(Errc::UnknownFormat, path.string() + ": expected an array of dialogues");
  for (std::size_t k = 0; k < root.size(); ++k) {
    try {
      out.dialogues.push_back(sgd_record(root[k]));
    } catch (const std::exception& e) {
      ++out.skipped;
      out.warnings.push_back(path.filename().string() + ": record " + std::to_string(k) + ": " + e.what());
    }
  }
}

}  // namespace

std::string_view corpus_format_name(CorpusFormat f) {
  switch (f) {
    case CorpusFormat::PlainJsonl: return "plain-jsonl";
    case CorpusFormat::MultiWozJson: return "multiwoz-json";
    case CorpusFormat::SgdJson: return "sgd-json";
  }
  return "?";
}

CorpusFormat parse_corpus_format(std::string_view name) {
  for (auto f : {CorpusFormat::PlainJsonl, CorpusFormat::MultiWozJson, CorpusFormat::SgdJson}) {
    if (corpus_format_name(f) == name) return f;
  }
  throw Error(Errc::UnknownFormat, "unknown corpus format '" + std::string(name) +
                                       "' (expected plain-jsonl, multiwoz-json or sgd-json)");
}

std::size_t AnnotatedDialogue::user_turn_count() const {
  return static_cast<std::size_t>(
      std::count_if(turns.begin(), turns.end(), [](const Turn& t) { return t.speaker == Speaker::User; }));
}

LoadResult load_dialogues(CorpusManifest& manifest) {
  if (!std::filesystem::is_regular_file(manifest.path)) {
    throw Error(Errc::UnreadableFile, "cannot open " + manifest.path.string());
  }
  LoadResult out;
  switch (manifest.format) {
    case CorpusFormat::PlainJsonl: load_plain(manifest.path, out); break;
    case CorpusFormat::MultiWozJson: load_multiwoz(manifest.path, out); break;
    case CorpusFormat::SgdJson: load_sgd(manifest.path, out); break;
  }
  if (out.dialogues.empty()) {
    throw Error(Errc::ZeroValidDialogues, manifest.path.string() + " contains no valid dialogues (" +
                                              std::to_string(out.skipped) + " skipped)");
  }
  manifest.dialogue_count = out.dialogues.size();
  manifest.has_gold = std::any_of(out.dialogues.begin(), out.dialogues.end(),
                                  [](const AnnotatedDialogue& d) { return d.gold_states.has_value(); });
  return out;
}

ojson state_json(const DialogueState& s) {
  ojson arr = ojson::array();
  for (const auto& t : s.triples()) arr.push_back({{"domain", t.domain()}, {"slot", t.slot()}, {"value", t.value()}});
  return arr;
}

DialogueState state_from_json(const json& j) {
  DialogueState s;
  for (const auto& t : j) {
    s.set({t.at("domain").get<std::string>(), t.at("slot").get<std::string>(), t.at("value").get<std::string>()});
  }
  return s;
}

void write_dialogues(const std::filesystem::path& path, const std::vector<AnnotatedDialogue>& dialogues) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  for (const auto& d : dialogues) {
    ojson j;
    j["dialogue_id"] = d.dialogue_id;
    j["turns"] = ojson::array();
    for (const auto& t : d.turns) j["turns"].push_back({{"speaker", speaker_name(t.speaker)}, {"text", t.text}});
    if (d.gold_states) {
      j["gold"] = ojson::array();
      for (const auto& s : *d.gold_states) j["gold"].push_back(state_json(s));
    }
    out << dump_line(j) << '\n';
  }
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

ojson prediction_json(const PredictionRecord& r) {
  ojson diags = ojson::array();
  for (const auto& d : r.diagnostics) diags.push_back({{"kind", diagnostic_kind_name(d.kind)}, {"detail", d.detail}});
  return {{"dialogue_id", r.dialogue_id},
          {"turn", r.turn},
          {"predicted_state", state_json(r.predicted_state)},
          {"diagnostics", std::move(diags)}};
}

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records,
                       const ojson& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  if (!meta.is_null()) out << dump_line({{"_meta", meta}}) << '\n';
  for (const auto& r : records) out << dump_line(prediction_json(r)) << '\n';
  out.flush();
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot open " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("_meta")) continue;
      PredictionRecord r;
      r.dialogue_id = j.at("dialogue_id").get<std::string>();
      r.turn = j.at("turn").get<std::size_t>();
      r.predicted_state = state_from_json(j.at("predicted_state"));
      for (const auto& d : j.at("diagnostics")) {
        r.diagnostics.push_back({parse_diagnostic_kind(d.at("kind").get<std::string>()), d.at("detail").get<std::string>()});
      }
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(Errc::IoError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

ojson to_json(const ErrorReport& r) {
  ojson samples = ojson::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"domain", s.domain},
                       {"slot", s.slot},
                       {"predicted", s.predicted},
                       {"gold", s.gold},
                       {"kind", s.kind}});
  }
  return {{"nonexistent_value_count", r.nonexistent_value_count},
          {"synonym_count", r.synonym_count},
          {"total_errors", r.total_errors},
          {"samples", std::move(samples)}};
}

ojson report_json(std::span<const TurnPair> turns, std::size_t parse_failure_count, const ErrorReport& errors) {
  const PrfScore prf = slot_f1(turns);
  ojson j;
  j["jga"] = jga(turns);
  j["slot_precision"] = prf.precision;
  j["slot_recall"] = prf.recall;
  j["slot_f1"] = prf.f1;
  try {
    j["slot_accuracy"] = slot_accuracy(turns);
  } catch (const Error& e) {
    if (e.code() != Errc::NoGoldSlots) throw;
    j["slot_accuracy"] = nullptr;
  }
  j["turn_count"] = turns.size();
  j["parse_failure_count"] = parse_failure_count;
  j["error_report"] = to_json(errors);
  return j;
}

void write_json_file(const std::filesystem::path& path, const ojson& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << j.dump(2, ' ', false, json::error_handler_t::replace) << '\n';
  out.flush();
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_all(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::IoError, path.string() + ": " + e.what());
  }
}

}  // namespace freedst
