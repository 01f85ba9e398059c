#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freedst/dialogue_model.hpp"
#include "freedst/matrix.hpp"

namespace freedst {

enum class NodeKind { Domain, SlotValue };

std::string_view node_kind_name(NodeKind k);  // "domain" / "slot_value"

struct Node {
  std::size_t index = 0;
  NodeKind kind = NodeKind::Domain;
  std::string label;  // domain name, or "slot-value"
  std::string slot;   // SlotValue only
  std::string value;  // SlotValue only

  friend bool operator==(const Node&, const Node&) = default;
};

/// Undirected edge (i, j) with i < j.
using Edge = std::pair<std::size_t, std::size_t>;

Edge make_edge(std::size_t a, std::size_t b);

/// Bipartite graph between Domain and SlotValue nodes.
class StateGraph {
 public:
  std::size_t add_domain(const std::string& domain);
  std::size_t add_slot_value(const std::string& slot, const std::string& value);
  /// Adds an edge between a Domain and a SlotValue node; duplicates collapse.
  void add_edge(std::size_t a, std::size_t b);

  const std::vector<Node>& nodes() const { return nodes_; }
  /// Sorted, unique.
  std::vector<Edge> edges() const { return {edges_.begin(), edges_.end()}; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_edge(std::size_t a, std::size_t b) const;
  std::optional<std::size_t> find_domain(const std::string& domain) const;
  std::optional<std::size_t> find_slot_value(const std::string& slot, const std::string& value) const;
  std::vector<std::size_t> domain_nodes() const;
  std::vector<std::size_t> slot_value_nodes() const;

  /// Dense symmetric 0/1 adjacency over `edges` (defaults to all edges).
  Matrix adjacency() const;
  Matrix adjacency(std::span<const Edge> edges) const;

 private:
  std::vector<Node> nodes_;
  std::set<Edge> edges_;
  std::map<std::string, std::size_t> domain_index_;
  std::map<std::pair<std::string, std::string>, std::size_t> slot_value_index_;
};

/// One Domain node per domain and one SlotValue node per (slot, value), indexed in
/// first-seen order; one edge per observed triple. Sentinel values add nothing.
StateGraph build_graph(std::span<const DialogueState> states);

struct SplitFractions {
  double train = 0.85;
  double val = 0.05;
  double test = 0.10;
};

struct EdgeSplit {
  std::vector<Edge> train;
  std::vector<Edge> val;
  std::vector<Edge> test;
  std::vector<Edge> neg_val;
  std::vector<Edge> neg_test;
  std::uint64_t seed = 0;
};

/// Random disjoint train/val/test partition with matched negative samples.
///
/// Sizes: val = round(|E| val), test = round(|E| test), each at least 1, train takes
/// the rest. Negatives are Domain x SlotValue non-edges drawn without replacement.
/// Throws Errc::BadFractions, Errc::TooFewEdges, Errc::InsufficientNegatives.
EdgeSplit split_edges(const StateGraph& g, const SplitFractions& fractions, std::uint64_t seed);

/// `count` distinct Domain x SlotValue non-edges, excluding `exclude` as well.
std::vector<Edge> sample_negatives(const StateGraph& g, std::size_t count, Rng& rng,
                                   std::span<const Edge> exclude = {});

/// n x n one-hot node features.
Matrix identity_features(const StateGraph& g);

struct NodeSet {
  std::vector<std::size_t> nodes;     // sorted
  std::vector<std::string> absent;    // "domain:<d>" / "slot_value:<s>-<v>"
};

/// Graph nodes touched by `states`; unknown domains and slot-values are reported, not added.
NodeSet dialogue_node_set(const StateGraph& g, std::span<const DialogueState> states);

/// "i j" per line. Lines starting with '#' are comments.
void write_edge_list(const std::filesystem::path& path, const StateGraph& g, const std::string& header = {});
/// JSONL {index, kind, label, slot?, value?} per node.
void write_node_table(const std::filesystem::path& path, const StateGraph& g, const std::string& header = {});
StateGraph read_graph(const std::filesystem::path& node_table, const std::filesystem::path& edge_list);

}  // namespace freedst
