#include <gtest/gtest.h>

#include "freedst/error.hpp"
#include "freedst/metrics.hpp"
#include "support/oracles.hpp"

using namespace freedst;

namespace {

DialogueState to_state(const oracle::TripleSet& s) {
  DialogueState out;
  for (const auto& [d, sl, v] : s) out.set({d, sl, v});
  return out;
}

std::vector<TurnPair> to_pairs(const std::vector<oracle::Turn>& turns) {
  std::vector<TurnPair> out;
  for (const auto& t : turns) out.push_back({to_state(t.pred), to_state(t.gold)});
  return out;
}

}  // namespace

TEST(Jga, Examples) {
  const DialogueState east{{"hotel", "area", "east"}};
  const DialogueState west{{"hotel", "area", "west"}};
  EXPECT_EQ(jga(std::vector<TurnPair>{{east, east}}), 1.0);
  EXPECT_EQ(jga(std::vector<TurnPair>{{east, east}, {west, east}}), 0.5);
  EXPECT_EQ(jga(std::vector<TurnPair>{{{}, {}}}), 1.0);
}

TEST(SlotF1, Examples) {
  const DialogueState gold{{"hotel", "area", "east"}};
  const DialogueState pred{{"hotel", "area", "east"}, {"hotel", "stars", "4"}};
  const auto s = slot_f1(std::vector<TurnPair>{{pred, gold}});
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3.0);

  const auto miss = slot_f1(std::vector<TurnPair>{{{}, DialogueState{{"a", "b", "c"}}}});
  EXPECT_EQ(miss.precision, 0.0);
  EXPECT_EQ(miss.recall, 0.0);
  EXPECT_EQ(miss.f1, 0.0);

  const auto empty = slot_f1(std::vector<TurnPair>{{{}, {}}});
  EXPECT_EQ(empty.f1, 1.0);
}

TEST(SlotAccuracy, Examples) {
  const DialogueState g1{{"hotel", "area", "east"}};
  const DialogueState g2{{"hotel", "area", "east"}, {"hotel", "stars", "4"}};
  EXPECT_EQ(slot_accuracy(std::vector<TurnPair>{{g1, g1}}), 1.0);
  EXPECT_EQ(slot_accuracy(std::vector<TurnPair>{{g1, g2}}), 0.5);
  EXPECT_EQ(slot_accuracy(std::vector<TurnPair>{{DialogueState{{"hotel", "area", "west"}}, g1}}), 0.0);
}

TEST(Metrics, ErrorsOnDegenerateInput) {
  const std::vector<TurnPair> none;
  for (auto fn : {+[](std::span<const TurnPair> t) { jga(t); }, +[](std::span<const TurnPair> t) { slot_f1(t); },
                  +[](std::span<const TurnPair> t) { slot_accuracy(t); }}) {
    try {
      fn(none);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::EmptySequence);
    }
  }
  try {
    slot_accuracy(std::vector<TurnPair>{{DialogueState{{"a", "b", "c"}}, {}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoGoldSlots);
  }
}

TEST(Metrics, NoneTriplesAreIgnored) {
  const DialogueState gold{{"hotel", "area", "east"}, {"hotel", "stars", "NONE"}};
  const DialogueState pred{{"hotel", "area", "east"}, {"hotel", "parking", "NONE"}};
  const std::vector<TurnPair> t{{pred, gold}};
  EXPECT_EQ(jga(t), 1.0);
  EXPECT_EQ(slot_f1(t).f1, 1.0);
  EXPECT_EQ(slot_accuracy(t), 1.0);
}

TEST(Metrics, MatchBruteForceOracle) {
  oracle::TurnGen gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto turns = gen.turns(1 + gen.pick(6), 10);
    const auto pairs = to_pairs(turns);
    EXPECT_EQ(jga(pairs), oracle::jga(turns));
    const auto got = slot_f1(pairs);
    const auto want = oracle::slot_f1(turns);
    EXPECT_EQ(got.precision, want.p);
    EXPECT_EQ(got.recall, want.r);
    EXPECT_EQ(got.f1, want.f);
    const double acc = oracle::slot_accuracy(turns);
    if (acc >= 0) EXPECT_EQ(slot_accuracy(pairs), acc);
  }
}

TEST(Metrics, PermutationInvariant) {
  oracle::TurnGen gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto pairs = to_pairs(gen.turns(6, 6));
    const double j = jga(pairs);
    const auto f = slot_f1(pairs);
    std::reverse(pairs.begin(), pairs.end());
    std::rotate(pairs.begin(), pairs.begin() + 2, pairs.end());
    EXPECT_EQ(jga(pairs), j);
    EXPECT_EQ(slot_f1(pairs).f1, f.f1);
  }
}

TEST(Metrics, AddingCorrectTripleNeverHurts) {
  oracle::TurnGen gen(11);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto turns = gen.turns(3, 6);
    const auto before = to_pairs(turns);
    auto after = before;
    bool changed = false;
    for (const auto& g : before[0].gold.without_none().triples()) {
      if (before[0].predicted.contains(g)) continue;
      after[0].predicted.set(g);
      changed = true;
      break;
    }
    if (!changed) continue;
    ++checked;
    EXPECT_GE(jga(after), jga(before));
    EXPECT_GE(slot_f1(after).precision, slot_f1(before).precision);
    EXPECT_GE(slot_f1(after).recall, slot_f1(before).recall);
    EXPECT_GE(slot_f1(after).f1, slot_f1(before).f1);
    EXPECT_GE(slot_accuracy(after), slot_accuracy(before));
  }
  EXPECT_GT(checked, 50);
}

TEST(Metrics, ByDomainBreakdown) {
  const DialogueState gold{{"hotel", "area", "east"}, {"taxi", "day", "monday"}};
  const DialogueState pred{{"hotel", "area", "east"}, {"taxi", "day", "friday"}};
  const auto m = slot_f1_by_domain(std::vector<TurnPair>{{pred, gold}});
  EXPECT_EQ(m.at("hotel").f1, 1.0);
  EXPECT_EQ(m.at("taxi").f1, 0.0);
}
