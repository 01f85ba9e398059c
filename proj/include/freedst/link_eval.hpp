#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "freedst/state_graph.hpp"
#include "freedst/vgae.hpp"

namespace freedst {

/// Rank-based ROC AUC; ties count one half. Throws Errc::DegenerateLabels.
double auc(std::span<const double> scores, const std::vector<bool>& labels);

/// Mean precision at each positive's rank, scores descending, ties in input order.
/// Throws Errc::NoPositives.
double average_precision(std::span<const double> scores, const std::vector<bool>& labels);

struct LinkScores {
  double auc = 0.0;
  double ap = 0.0;
};

/// Scores split.test against split.neg_test with Z = mu from the training adjacency.
LinkScores evaluate_split(const VgaeParams& params, const StateGraph& graph, const EdgeSplit& split);

struct ScoredEdge {
  std::size_t domain = 0;
  std::size_t slot_value = 0;
  double score = 0.0;
};

/// Top-k Domain x SlotValue non-edges touching the context's domains, probability
/// descending, ties by (domain, slot_value) index. The domains of a context are its
/// Domain nodes plus the domains adjacent to its SlotValue nodes.
/// Throws Errc::EmptyContext.
std::vector<ScoredEdge> rank_candidates(const VgaeParams& params, const StateGraph& graph,
                                        std::span<const std::size_t> context_nodes, std::size_t top_k);

/// "Node pair: (['restaurant'], ['food-asian']), Probability: 0.7311"
std::string format_candidate(const StateGraph& graph, const ScoredEdge& e);

nlohmann::ordered_json candidate_json(const StateGraph& graph, const ScoredEdge& e, const std::string& dialogue_id,
                                      std::size_t rank);

struct CvReport {
  std::vector<double> fold_auc;
  std::vector<double> fold_ap;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  double mean_ap = 0.0;
  double std_ap = 0.0;
};

/// Edge-level k-fold CV: each fold's edges (plus as many sampled non-edges) are held
/// out while the model trains on the remaining edges. std is the population std.
/// Throws Errc::TooFewEdges.
CvReport cross_validate(const StateGraph& graph, std::size_t k, const TrainConfig& config);

nlohmann::ordered_json to_json(const CvReport& r);

}  // namespace freedst
