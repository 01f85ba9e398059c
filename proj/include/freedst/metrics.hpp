#pragma once

#include <map>
#include <span>
#include <string>

#include "freedst/dialogue_model.hpp"

namespace freedst {

struct TurnPair {
  DialogueState predicted;
  DialogueState gold;
};

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Micro-averaged counts over a turn sequence (sentinel values excluded).
struct SlotCounts {
  long true_positive = 0;
  long false_positive = 0;
  long false_negative = 0;
};

SlotCounts slot_counts(std::span<const TurnPair> turns);
PrfScore prf_from_counts(const SlotCounts& c);

/// Fraction of turns whose predicted state equals gold exactly. Throws Errc::EmptySequence.
double jga(std::span<const TurnPair> turns);

/// Micro precision/recall/F1 over triples. Both totals empty scores 1/1/1;
/// an empty side otherwise scores 0 for the undefined ratio. Throws Errc::EmptySequence.
PrfScore slot_f1(std::span<const TurnPair> turns);

/// Fraction of gold (domain, slot) keys whose predicted value matches.
/// Throws Errc::EmptySequence, Errc::NoGoldSlots.
double slot_accuracy(std::span<const TurnPair> turns);

/// Slot F1 per gold-or-predicted domain. Convenience breakdown.
std::map<std::string, PrfScore> slot_f1_by_domain(std::span<const TurnPair> turns);

}  // namespace freedst
