#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "freedst/dataset_io.hpp"
#include "freedst/error.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace freedst;
namespace fs = std::filesystem;

namespace {

const fs::path kData = FREEDST_DATA_DIR;

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Config;
}

LoadResult load(const fs::path& p, CorpusFormat f = CorpusFormat::PlainJsonl) {
  CorpusManifest m{f, p};
  return load_dialogues(m);
}

std::size_t nonblank_lines(const fs::path& p) {
  std::size_t n = 0;
  std::istringstream in(testutil::slurp(p));
  for (std::string line; std::getline(in, line);) {
    if (!normalize_text(line).empty()) ++n;
  }
  return n;
}

}  // namespace

TEST(Format, NamesRoundTrip) {
  for (auto f : {CorpusFormat::PlainJsonl, CorpusFormat::MultiWozJson, CorpusFormat::SgdJson}) {
    EXPECT_EQ(parse_corpus_format(corpus_format_name(f)), f);
  }
  EXPECT_EQ(code_of([] { parse_corpus_format("csv"); }), Errc::UnknownFormat);
}

TEST(Format, SgdServiceDomain) {
  EXPECT_EQ(sgd_service_domain("Restaurants_1"), "restaurants");
  EXPECT_EQ(sgd_service_domain("RideSharing_22"), "ridesharing");
  EXPECT_EQ(sgd_service_domain("Banks"), "banks");
  EXPECT_EQ(sgd_service_domain("Media_x"), "media_x");
}

TEST(Plain, FixtureCorpusLoads) {
  CorpusManifest m{CorpusFormat::PlainJsonl, kData / "fixtures" / "dialogues.jsonl"};
  const auto r = load_dialogues(m);
  EXPECT_EQ(r.skipped, 0u);
  EXPECT_EQ(r.dialogues.size(), 20u);
  EXPECT_EQ(m.dialogue_count, 20u);
  EXPECT_TRUE(m.has_gold);
  for (const auto& d : r.dialogues) {
    ASSERT_TRUE(d.gold_states);
    EXPECT_EQ(d.gold_states->size(), d.user_turn_count());
  }
}

TEST(Plain, MalformedRecordsAreSkippedAndCounted) {
  const fs::path p = kData / "fixtures" / "malformed.jsonl";
  CorpusManifest m{CorpusFormat::PlainJsonl, p};
  const auto r = load_dialogues(m);
  ASSERT_EQ(r.dialogues.size(), 2u);
  EXPECT_EQ(r.dialogues[0].dialogue_id, "ok-1");
  EXPECT_EQ(r.dialogues[1].dialogue_id, "ok-2");
  EXPECT_EQ(r.skipped, 3u);  // not json, unknown speaker, gold length mismatch
  EXPECT_EQ(r.warnings.size(), r.skipped);
  EXPECT_EQ(r.skipped + r.dialogues.size(), nonblank_lines(p));
  EXPECT_FALSE(r.dialogues[1].gold_states.has_value());
  EXPECT_TRUE(m.has_gold);  // at least one dialogue is annotated
}

TEST(Plain, NoneInGoldIsDropped) {
  testutil::TempDir dir;
  const auto p = dir.write("c.jsonl",
                           R"({"dialogue_id":"a","turns":[{"speaker":"user","text":"hi"}],)"
                           R"("gold":[[{"domain":"Hotel","slot":"Area","value":"none"},)"
                           R"({"domain":"hotel","slot":"stars","value":"4"}]]})"
                           "\n");
  const auto r = load(p);
  ASSERT_EQ(r.dialogues.size(), 1u);
  const DialogueState expected{{"hotel", "stars", "4"}};
  EXPECT_EQ(r.dialogues[0].gold_states->at(0), expected);
}

TEST(Plain, EmptyFileHasZeroValidDialogues) {
  testutil::TempDir dir;
  const auto p = dir.write("empty.jsonl", "");
  EXPECT_EQ(code_of([&] { load(p); }), Errc::ZeroValidDialogues);
  const auto q = dir.write("junk.jsonl", "{\n[1,2]\n");
  EXPECT_EQ(code_of([&] { load(q); }), Errc::ZeroValidDialogues);
}

TEST(Plain, MissingFileIsUnreadable) {
  EXPECT_EQ(code_of([] { load("/nonexistent/corpus.jsonl"); }), Errc::UnreadableFile);
}

TEST(Plain, WriteThenLoadIsIdempotent) {
  testutil::TempDir dir;
  const auto first = load(kData / "fixtures" / "dialogues.jsonl").dialogues;
  write_dialogues(dir / "a.jsonl", first);
  const auto second = load(dir / "a.jsonl").dialogues;
  EXPECT_EQ(first, second);
  write_dialogues(dir / "b.jsonl", second);
  EXPECT_EQ(testutil::slurp(dir / "a.jsonl"), testutil::slurp(dir / "b.jsonl"));
}

TEST(Plain, UnicodeSurvivesRoundTrip) {
  testutil::TempDir dir;
  AnnotatedDialogue d;
  d.dialogue_id = "ü-1";
  d.turns = {{Speaker::User, "¿Dónde está el café? 🏨"}, {Speaker::System, "日本語で大丈夫です"}};
  d.gold_states = std::vector<DialogueState>{{{"hotel", "name", "café müller"}}};
  write_dialogues(dir / "u.jsonl", {d});
  const auto back = load(dir / "u.jsonl").dialogues;
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], d);
}

TEST(MultiWoz, StateComesFromFollowingSystemTurn) {
  const auto r = load(kData / "fixtures" / "multiwoz_sample.json", CorpusFormat::MultiWozJson);
  ASSERT_EQ(r.dialogues.size(), 2u);
  EXPECT_EQ(r.skipped, 1u);  // empty log
  const auto& d = r.dialogues[0];
  EXPECT_EQ(d.dialogue_id, "MUL0001.json");
  EXPECT_EQ(d.turns.size(), 4u);
  EXPECT_EQ(d.turns[1].speaker, Speaker::System);
  ASSERT_TRUE(d.gold_states);
  ASSERT_EQ(d.gold_states->size(), 2u);
  const DialogueState t1{{"hotel", "pricerange", "cheap"}, {"hotel", "area", "east"}};
  const DialogueState t2{{"hotel", "pricerange", "cheap"},
                         {"hotel", "area", "east"},
                         {"hotel", "book stay", "3"},
                         {"hotel", "book day", "friday"}};
  EXPECT_EQ(d.gold_states->at(0), t1);
  EXPECT_EQ(d.gold_states->at(1), t2);

  const DialogueState cafe{{"restaurant", "food", "café"}, {"restaurant", "area", "centre"}};
  EXPECT_EQ(r.dialogues[1].gold_states->at(0), cafe);
}

TEST(Sgd, ServicesMergeAndCarryForward) {
  const auto r = load(kData / "fixtures" / "sgd_sample.json", CorpusFormat::SgdJson);
  ASSERT_EQ(r.dialogues.size(), 1u);
  EXPECT_EQ(r.skipped, 1u);
  const auto& d = r.dialogues[0];
  ASSERT_TRUE(d.gold_states);
  ASSERT_EQ(d.gold_states->size(), 2u);
  const DialogueState t1{{"restaurants", "cuisine", "italian"}, {"restaurants", "city", "san jose"}};
  DialogueState t2 = t1;
  t2.set({"ridesharing", "destination", "tony's"});
  EXPECT_EQ(d.gold_states->at(0), t1);
  EXPECT_EQ(d.gold_states->at(1), t2);
}

TEST(Formats, WrongShapeIsUnknownFormat) {
  EXPECT_EQ(code_of([] { load(kData / "fixtures" / "sgd_sample.json", CorpusFormat::MultiWozJson); }),
            Errc::UnknownFormat);
  EXPECT_EQ(code_of([] { load(kData / "fixtures" / "multiwoz_sample.json", CorpusFormat::SgdJson); }),
            Errc::UnknownFormat);
  EXPECT_EQ(code_of([] { load(kData / "fixtures" / "dialogues.jsonl", CorpusFormat::SgdJson); }),
            Errc::UnreadableFile);
}

TEST(Predictions, RoundTripSkipsMetaLine) {
  testutil::TempDir dir;
  std::vector<PredictionRecord> recs{
      {"d1", 1, {{"hotel", "area", "east"}}, {}},
      {"d1", 2, {{"hotel", "area", "east"}, {"taxi", "leave at", "17:00"}},
       {{DiagnosticKind::ListLengthMismatch, "x"}}},
  };
  write_predictions(dir / "p.jsonl", recs, {{"tool", "t"}});
  const auto text = testutil::slurp(dir / "p.jsonl");
  EXPECT_EQ(text.rfind(R"({"_meta":{"tool":"t"}})", 0), 0u);
  EXPECT_EQ(read_predictions(dir / "p.jsonl"), recs);
}

TEST(Predictions, BadLineIsIoError) {
  testutil::TempDir dir;
  const auto p = dir.write("p.jsonl", R"({"dialogue_id":"d","turn":1,"predicted_state":[],"diagnostics":[]})"
                                      "\n{oops\n");
  EXPECT_EQ(code_of([&] { read_predictions(p); }), Errc::IoError);
}

TEST(Report, SchemaAndNullAccuracy) {
  std::vector<TurnPair> turns{{{{"hotel", "area", "east"}}, {}}};
  const auto j = report_json(turns, 2, {});
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  const std::vector<std::string> expected{"jga",          "slot_precision", "slot_recall",
                                          "slot_f1",      "slot_accuracy",  "turn_count",
                                          "parse_failure_count", "error_report"};
  EXPECT_EQ(keys, expected);
  EXPECT_TRUE(j["slot_accuracy"].is_null());
  EXPECT_EQ(j["parse_failure_count"], 2);
  EXPECT_EQ(j["turn_count"], 1);
}

TEST(KFold, SizesAndCoverage) {
  std::vector<int> items(23);
  std::iota(items.begin(), items.end(), 0);
  const auto folds = kfold_split(items, 5, 9);
  ASSERT_EQ(folds.size(), 5u);
  std::vector<std::size_t> sizes;
  std::multiset<int> seen;
  for (const auto& f : folds) {
    sizes.push_back(f.size());
    seen.insert(f.begin(), f.end());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{5, 5, 5, 4, 4}));
  EXPECT_EQ(seen, std::multiset<int>(items.begin(), items.end()));
  EXPECT_EQ(kfold_split(items, 5, 9), folds);
  EXPECT_NE(kfold_split(items, 5, 10), folds);
}

TEST(KFold, EvenSplitAndErrors) {
  std::vector<int> items{1, 2, 3, 4, 5, 6};
  for (const auto& f : kfold_split(items, 3, 1)) EXPECT_EQ(f.size(), 2u);
  EXPECT_EQ(code_of([&] { kfold_split(items, 7, 1); }), Errc::TooFewItems);
  EXPECT_EQ(code_of([&] { kfold_split(items, 0, 1); }), Errc::TooFewItems);
}

TEST(KFold, PropertyFoldsPartitionInput) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.uniform_index(60);
    const std::size_t k = 2 + rng.uniform_index(n - 1);
    std::vector<std::size_t> items(n);
    std::iota(items.begin(), items.end(), 0);
    const auto folds = kfold_split(items, k, seed);
    std::size_t lo = n, hi = 0, total = 0;
    std::set<std::size_t> seen;
    for (const auto& f : folds) {
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      total += f.size();
      seen.insert(f.begin(), f.end());
    }
    ASSERT_EQ(total, n);
    ASSERT_EQ(seen.size(), n);
    ASSERT_LE(hi - lo, 1u);
  }
}
