#include "freedst/metrics.hpp"

#include "freedst/error.hpp"

namespace freedst {

namespace {

void require_turns(std::span<const TurnPair> turns, const char* metric) {
  if (turns.empty()) throw Error(Errc::EmptySequence, std::string(metric) + " needs at least one turn");
}

void add_counts(SlotCounts& c, const DialogueState& pred, const DialogueState& gold) {
  for (const auto& [key, value] : pred.entries()) {
    if (value == kNoneValue) continue;
    const auto g = gold.value_of(key);
    if (g && *g == value) {
      ++c.true_positive;
    } else {
      ++c.false_positive;
    }
  }
  for (const auto& [key, value] : gold.entries()) {
    if (value == kNoneValue) continue;
    const auto p = pred.value_of(key);
    if (!p || *p != value) ++c.false_negative;
  }
}

}  // namespace

SlotCounts slot_counts(std::span<const TurnPair> turns) {
  SlotCounts c;
  for (const auto& t : turns) add_counts(c, t.predicted, t.gold);
  return c;
}

PrfScore prf_from_counts(const SlotCounts& c) {
  const long predicted = c.true_positive + c.false_positive;
  const long actual = c.true_positive + c.false_negative;
  if (predicted == 0 && actual == 0) return {1.0, 1.0, 1.0};
  PrfScore s;
  s.precision = predicted > 0 ? static_cast<double>(c.true_positive) / static_cast<double>(predicted) : 0.0;
  s.recall = actual > 0 ? static_cast<double>(c.true_positive) / static_cast<double>(actual) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

double jga(std::span<const TurnPair> turns) {
  require_turns(turns, "joint goal accuracy");
  long exact = 0;
  for (const auto& t : turns) {
    if (t.predicted.without_none() == t.gold.without_none()) ++exact;
  }
  return static_cast<double>(exact) / static_cast<double>(turns.size());
}

PrfScore slot_f1(std::span<const TurnPair> turns) {
  require_turns(turns, "slot F1");
  return prf_from_counts(slot_counts(turns));
}

double slot_accuracy(std::span<const TurnPair> turns) {
  require_turns(turns, "slot accuracy");
  long total = 0;
  long correct = 0;
  for (const auto& t : turns) {
    for (const auto& [key, value] : t.gold.entries()) {
      if (value == kNoneValue) continue;
      ++total;
      const auto p = t.predicted.value_of(key);
      if (p && *p == value) ++correct;
    }
  }
  if (total == 0) throw Error(Errc::NoGoldSlots, "slot accuracy needs at least one gold slot");
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::map<std::string, PrfScore> slot_f1_by_domain(std::span<const TurnPair> turns) {
  std::map<std::string, SlotCounts> counts;
  for (const auto& t : turns) {
    std::map<std::string, std::pair<DialogueState, DialogueState>> split;
    for (const auto& tr : t.predicted.triples()) split[tr.domain()].first.set(tr);
    for (const auto& tr : t.gold.triples()) split[tr.domain()].second.set(tr);
    for (const auto& [domain, states] : split) add_counts(counts[domain], states.first, states.second);
  }
  std::map<std::string, PrfScore> out;
  for (const auto& [domain, c] : counts) out[domain] = prf_from_counts(c);
  return out;
}

}  // namespace freedst
