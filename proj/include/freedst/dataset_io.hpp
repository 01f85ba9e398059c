#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "freedst/dialogue_model.hpp"
#include "freedst/error.hpp"
#include "freedst/metrics.hpp"
#include "freedst/rng.hpp"
#include "freedst/state_parser.hpp"

namespace freedst {

enum class CorpusFormat { PlainJsonl, MultiWozJson, SgdJson };

std::string_view corpus_format_name(CorpusFormat f);  // "plain-jsonl", "multiwoz-json", "sgd-json"
/// Throws Errc::UnknownFormat.
CorpusFormat parse_corpus_format(std::string_view name);

/// SGD service name to domain: trailing "_<digits>" dropped, case-folded ("Restaurants_1" -> "restaurants").
std::string sgd_service_domain(const std::string& service);

struct AnnotatedDialogue {
  std::string dialogue_id;
  std::vector<Turn> turns;
  /// Cumulative gold state after each user turn, when annotated.
  std::optional<std::vector<DialogueState>> gold_states;

  std::size_t user_turn_count() const;
  friend bool operator==(const AnnotatedDialogue&, const AnnotatedDialogue&) = default;
};

struct CorpusManifest {
  CorpusFormat format = CorpusFormat::PlainJsonl;
  std::filesystem::path path;
  std::size_t dialogue_count = 0;  // filled by load_dialogues
  bool has_gold = false;           // filled by load_dialogues
};

struct LoadResult {
  std::vector<AnnotatedDialogue> dialogues;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;  // one per skipped record
};

/// Reads a corpus and normalises every dialogue. Malformed records are skipped and
/// counted. Updates manifest.dialogue_count and manifest.has_gold.
/// Throws Errc::UnreadableFile, Errc::UnknownFormat, Errc::ZeroValidDialogues.
LoadResult load_dialogues(CorpusManifest& manifest);

/// Writes dialogues in the PlainJsonl schema.
void write_dialogues(const std::filesystem::path& path, const std::vector<AnnotatedDialogue>& dialogues);

nlohmann::ordered_json state_json(const DialogueState& s);
/// Throws Errc::EmptyInput on a triple with an empty domain or slot.
DialogueState state_from_json(const nlohmann::json& j);

struct PredictionRecord {
  std::string dialogue_id;
  std::size_t turn = 0;  // 1-based user-turn index
  DialogueState predicted_state;
  std::vector<Diagnostic> diagnostics;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// JSONL, one record per line. A non-null `meta` is written first as {"_meta": ...};
/// readers skip that line. Throws Errc::IoError.
void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records,
                       const nlohmann::ordered_json& meta = nullptr);
nlohmann::ordered_json prediction_json(const PredictionRecord& r);
/// Throws Errc::UnreadableFile, Errc::IoError on a malformed line.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

/// Report body: {jga, slot_precision, slot_recall, slot_f1, slot_accuracy, turn_count,
/// parse_failure_count, error_report}. slot_accuracy is null when gold has no slots.
nlohmann::ordered_json report_json(std::span<const TurnPair> turns, std::size_t parse_failure_count,
                                   const ErrorReport& errors);
nlohmann::ordered_json to_json(const ErrorReport& r);

/// Writes `j` followed by a newline. Throws Errc::IoError.
void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);
/// Throws Errc::UnreadableFile, Errc::IoError.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Seeded shuffle, then k contiguous chunks; the first |items| mod k folds get one extra.
/// Throws Errc::TooFewItems.
template <typename T>
std::vector<std::vector<T>> kfold_split(const std::vector<T>& items, std::size_t k, std::uint64_t seed) {
  if (k == 0 || items.size() < k) {
    throw Error(Errc::TooFewItems, "k-fold split of " + std::to_string(items.size()) + " items into " +
                                       std::to_string(k) + " folds");
  }
  std::vector<T> shuffled = items;
  Rng rng(seed);
  rng.shuffle(shuffled);
  std::vector<std::vector<T>> folds(k);
  const std::size_t base = items.size() / k;
  const std::size_t extra = items.size() % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(shuffled.begin() + static_cast<std::ptrdiff_t>(pos),
                    shuffled.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return folds;
}

}  // namespace freedst
