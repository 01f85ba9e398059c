#include "freedst/state_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "freedst/error.hpp"

namespace freedst {

std::string_view node_kind_name(NodeKind k) { return k == NodeKind::Domain ? "domain" : "slot_value"; }

Edge make_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::size_t StateGraph::add_domain(const std::string& domain) {
  if (auto it = domain_index_.find(domain); it != domain_index_.end()) return it->second;
  const std::size_t idx = nodes_.size();
  nodes_.push_back({idx, NodeKind::Domain, domain, {}, {}});
  domain_index_.emplace(domain, idx);
  return idx;
}

std::size_t StateGraph::add_slot_value(const std::string& slot, const std::string& value) {
  auto key = std::make_pair(slot, value);
  if (auto it = slot_value_index_.find(key); it != slot_value_index_.end()) return it->second;
  const std::size_t idx = nodes_.size();
  nodes_.push_back({idx, NodeKind::SlotValue, slot + "-" + value, slot, value});
  slot_value_index_.emplace(std::move(key), idx);
  return idx;
}

void StateGraph::add_edge(std::size_t a, std::size_t b) {
  if (a >= nodes_.size() || b >= nodes_.size()) {
    throw Error(Errc::IndexOutOfRange, "edge endpoint out of range");
  }
  if (nodes_[a].kind == nodes_[b].kind) {
    throw Error(Errc::DimensionMismatch, "edges must join a domain node and a slot-value node");
  }
  edges_.insert(make_edge(a, b));
}

bool StateGraph::has_edge(std::size_t a, std::size_t b) const {
  return edges_.contains(make_edge(a, b));
}

std::optional<std::size_t> StateGraph::find_domain(const std::string& domain) const {
  auto it = domain_index_.find(domain);
  if (it == domain_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> StateGraph::find_slot_value(const std::string& slot, const std::string& value) const {
  auto it = slot_value_index_.find({slot, value});
  if (it == slot_value_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> StateGraph::domain_nodes() const {
  std::vector<std::size_t> out;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::Domain) out.push_back(n.index);
  }
  return out;
}

std::vector<std::size_t> StateGraph::slot_value_nodes() const {
  std::vector<std::size_t> out;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::SlotValue) out.push_back(n.index);
  }
  return out;
}

Matrix StateGraph::adjacency() const { return adjacency(edges()); }

Matrix StateGraph::adjacency(std::span<const Edge> edges) const {
  Matrix a(nodes_.size(), nodes_.size());
  for (const auto& [i, j] : edges) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

StateGraph build_graph(std::span<const DialogueState> states) {
  StateGraph g;
  for (const auto& state : states) {
    for (const auto& [key, value] : state.entries()) {
      if (value == kNoneValue) continue;
      const std::size_t d = g.add_domain(key.first);
      const std::size_t sv = g.add_slot_value(key.second, value);
      g.add_edge(d, sv);
    }
  }
  return g;
}

std::vector<Edge> sample_negatives(const StateGraph& g, std::size_t count, Rng& rng, std::span<const Edge> exclude) {
  std::set<Edge> excluded(exclude.begin(), exclude.end());
  std::vector<Edge> pool;
  for (std::size_t d : g.domain_nodes()) {
    for (std::size_t sv : g.slot_value_nodes()) {
      const Edge e = make_edge(d, sv);
      if (!g.has_edge(e.first, e.second) && !excluded.contains(e)) pool.push_back(e);
    }
  }
  if (pool.size() < count) {
    throw Error(Errc::InsufficientNegatives, "need " + std::to_string(count) + " negative pairs but only " +
                                                 std::to_string(pool.size()) + " non-edges exist");
  }
  // Partial Fisher-Yates: the first `count` slots are a uniform sample without replacement.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

EdgeSplit split_edges(const StateGraph& g, const SplitFractions& f, std::uint64_t seed) {
  if (!(f.train > 0.0 && f.val > 0.0 && f.test > 0.0) || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "split fractions must be positive and sum to 1 (got train=" << f.train << " val=" << f.val
       << " test=" << f.test << ")";
    throw Error(Errc::BadFractions, os.str());
  }
  const std::size_t n = g.edge_count();
  if (n < 3) throw Error(Errc::TooFewEdges, "edge split needs at least 3 edges, graph has " + std::to_string(n));

  const auto rounded = [n](double frac) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * frac)));
  };
  std::size_t n_test = rounded(f.test);
  std::size_t n_val = rounded(f.val);
  while (n_test + n_val > n - 1) {
    if (n_test >= n_val && n_test > 1) {
      --n_test;
    } else {
      --n_val;
    }
  }

  Rng rng(seed);
  std::vector<Edge> edges = g.edges();
  rng.shuffle(edges);

  EdgeSplit split;
  split.seed = seed;
  split.test.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.val.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test),
                   edges.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  split.train.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), edges.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());

  auto negatives = sample_negatives(g, n_val + n_test, rng);
  split.neg_val.assign(negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.neg_test.assign(negatives.begin() + static_cast<std::ptrdiff_t>(n_val), negatives.end());
  return split;
}

Matrix identity_features(const StateGraph& g) { return Matrix::identity(g.node_count()); }

NodeSet dialogue_node_set(const StateGraph& g, std::span<const DialogueState> states) {
  std::set<std::size_t> nodes;
  std::set<std::string> absent;
  for (const auto& state : states) {
    for (const auto& [key, value] : state.entries()) {
      if (auto d = g.find_domain(key.first)) {
        nodes.insert(*d);
      } else {
        absent.insert("domain:" + key.first);
      }
      if (value == kNoneValue) continue;
      if (auto sv = g.find_slot_value(key.second, value)) {
        nodes.insert(*sv);
      } else {
        absent.insert("slot_value:" + key.second + "-" + value);
      }
    }
  }
  return {std::vector<std::size_t>(nodes.begin(), nodes.end()), std::vector<std::string>(absent.begin(), absent.end())};
}

void write_edge_list(const std::filesystem::path& path, const StateGraph& g, const std::string& header) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write edge list " + path.string());
  if (!header.empty()) out << "# " << header << '\n';
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

void write_node_table(const std::filesystem::path& path, const StateGraph& g, const std::string& header) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write node table " + path.string());
  if (!header.empty()) out << header << '\n';
  for (const auto& n : g.nodes()) {
    nlohmann::ordered_json j = {{"index", n.index}, {"kind", node_kind_name(n.kind)}, {"label", n.label}};
    if (n.kind == NodeKind::SlotValue) {
      j["slot"] = n.slot;
      j["value"] = n.value;
    }
    out << j.dump() << '\n';
  }
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

StateGraph read_graph(const std::filesystem::path& node_table, const std::filesystem::path& edge_list) {
  StateGraph g;
  {
    std::ifstream in(node_table, std::ios::binary);
    if (!in) throw Error(Errc::UnreadableFile, "cannot read node table " + node_table.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        if (j.contains("_meta")) continue;
        const auto index = j.at("index").get<std::size_t>();
        const auto kind = j.at("kind").get<std::string>();
        std::size_t got = 0;
        if (kind == "domain") {
          got = g.add_domain(j.at("label").get<std::string>());
        } else if (kind == "slot_value") {
          got = g.add_slot_value(j.at("slot").get<std::string>(), j.at("value").get<std::string>());
        } else {
          throw Error(Errc::Config, "unknown node kind '" + kind + "'");
        }
        if (got != index) throw Error(Errc::Config, "node indices must be dense and in order");
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Config, node_table.string() + ":" + std::to_string(lineno) + ": " + e.what());
      } catch (const Error& e) {
        throw Error(e.code(), node_table.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  std::ifstream in(edge_list, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot read edge list " + edge_list.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::size_t a = 0;
    std::size_t b = 0;
    if (!(ls >> a >> b)) {
      throw Error(Errc::Config, edge_list.string() + ":" + std::to_string(lineno) + ": expected 'i j'");
    }
    g.add_edge(a, b);
  }
  return g;
}

}  // namespace freedst
