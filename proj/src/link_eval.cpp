#include "freedst/link_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "freedst/dataset_io.hpp"

namespace freedst {

double auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw Error(Errc::DimensionMismatch, "auc: " + std::to_string(scores.size()) + " scores but " +
                                             std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = scores.size();
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(Errc::DegenerateLabels, "auc needs both positive and negative labels");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of 1-based midranks of the positives (Mann-Whitney U).
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) pos_rank_sum += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double average_precision(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw Error(Errc::DimensionMismatch, "average_precision: " + std::to_string(scores.size()) + " scores but " +
                                             std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!labels[order[r]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) throw Error(Errc::NoPositives, "average_precision needs at least one positive label");
  return sum / static_cast<double>(hits);
}

namespace {

LinkScores score_edges(const Matrix& z, std::span<const Edge> pos, std::span<const Edge> neg) {
  std::vector<double> scores;
  std::vector<bool> labels;
  scores.reserve(pos.size() + neg.size());
  for (const auto& [i, j] : pos) {
    scores.push_back(decode_edge(z, i, j));
    labels.push_back(true);
  }
  for (const auto& [i, j] : neg) {
    scores.push_back(decode_edge(z, i, j));
    labels.push_back(false);
  }
  return {auc(scores, labels), average_precision(scores, labels)};
}

}  // namespace

LinkScores evaluate_split(const VgaeParams& params, const StateGraph& graph, const EdgeSplit& split) {
  const Matrix norm_adj = normalize_adjacency(graph.adjacency(split.train));
  const Encoding enc = encode(identity_features(graph), norm_adj, params);
  return score_edges(enc.mu, split.test, split.neg_test);
}

std::vector<ScoredEdge> rank_candidates(const VgaeParams& params, const StateGraph& graph,
                                        std::span<const std::size_t> context_nodes, std::size_t top_k) {
  if (context_nodes.empty()) throw Error(Errc::EmptyContext, "rank_candidates needs at least one context node");
  const auto& nodes = graph.nodes();
  const auto edges = graph.edges();

  std::set<std::size_t> domains;
  for (std::size_t c : context_nodes) {
    if (c >= nodes.size()) throw Error(Errc::IndexOutOfRange, "context node " + std::to_string(c) + " not in graph");
    if (nodes[c].kind == NodeKind::Domain) domains.insert(c);
  }
  const std::set<std::size_t> context(context_nodes.begin(), context_nodes.end());
  for (const auto& [i, j] : edges) {
    // Edges join one node of each kind; pick out the domain end.
    const std::size_t d = nodes[i].kind == NodeKind::Domain ? i : j;
    const std::size_t sv = d == i ? j : i;
    if (context.contains(sv)) domains.insert(d);
  }

  const Encoding enc = encode(identity_features(graph), normalize_adjacency(graph.adjacency()), params);
  const auto slot_values = graph.slot_value_nodes();
  std::vector<ScoredEdge> out;
  for (std::size_t d : domains) {
    for (std::size_t sv : slot_values) {
      if (graph.has_edge(d, sv)) continue;
      out.push_back({d, sv, decode_edge(enc.mu, d, sv)});
    }
  }
  // Candidates are generated in (domain, slot_value) order, so a stable sort keeps index ties ordered.
  std::stable_sort(out.begin(), out.end(), [](const ScoredEdge& a, const ScoredEdge& b) { return a.score > b.score; });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

namespace {

std::string quoted_list_item(const std::string& s) {
  return s.find('\'') == std::string::npos ? "['" + s + "']" : "[\"" + s + "\"]";
}

std::string slot_value_label(const Node& n) { return n.slot + "-" + n.value; }

}  // namespace

std::string format_candidate(const StateGraph& graph, const ScoredEdge& e) {
  const auto& nodes = graph.nodes();
  char prob[32];
  std::snprintf(prob, sizeof prob, "%.4f", e.score);
  return "Node pair: (" + quoted_list_item(nodes.at(e.domain).label) + ", " +
         quoted_list_item(slot_value_label(nodes.at(e.slot_value))) + "), Probability: " + prob;
}

nlohmann::ordered_json candidate_json(const StateGraph& graph, const ScoredEdge& e, const std::string& dialogue_id,
                                      std::size_t rank) {
  const auto& nodes = graph.nodes();
  return {{"dialogue_id", dialogue_id},
          {"domain_label", nodes.at(e.domain).label},
          {"slotvalue_label", slot_value_label(nodes.at(e.slot_value))},
          {"probability", e.score},
          {"rank", rank}};
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(xs.size()));
}

constexpr std::uint64_t kFoldStream = 0xF01D;
constexpr std::uint64_t kFoldNegStream = 0xF01D0000;

}  // namespace

CvReport cross_validate(const StateGraph& graph, std::size_t k, const TrainConfig& config) {
  config.validate();
  if (k < 2) throw Error(Errc::Config, "cross-validation needs at least 2 folds");
  const auto edges = graph.edges();
  if (edges.size() < k) {
    throw Error(Errc::TooFewEdges, "cross-validation with " + std::to_string(k) + " folds needs at least " +
                                       std::to_string(k) + " edges, graph has " + std::to_string(edges.size()));
  }
  const auto folds = kfold_split(edges, k, Rng::derive(config.seed, kFoldStream));

  CvReport report;
  report.fold_auc.resize(k);
  report.fold_ap.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    EdgeSplit split;
    split.seed = config.seed;
    split.test = folds[f];
    std::sort(split.test.begin(), split.test.end());
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) split.train.insert(split.train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(split.train.begin(), split.train.end());
    Rng neg_rng(Rng::derive(config.seed, kFoldNegStream + f));
    split.neg_test = sample_negatives(graph, split.test.size(), neg_rng);

    const TrainResult trained = train(graph, split, config);
    const LinkScores s = evaluate_split(trained.params, graph, split);
    report.fold_auc[f] = s.auc;
    report.fold_ap[f] = s.ap;
  }
  mean_std(report.fold_auc, report.mean_auc, report.std_auc);
  mean_std(report.fold_ap, report.mean_ap, report.std_ap);
  return report;
}

nlohmann::ordered_json to_json(const CvReport& r) {
  return {{"fold_auc", r.fold_auc}, {"fold_ap", r.fold_ap}, {"mean_auc", r.mean_auc},
          {"std_auc", r.std_auc},   {"mean_ap", r.mean_ap}, {"std_ap", r.std_ap}};
}

}  // namespace freedst
