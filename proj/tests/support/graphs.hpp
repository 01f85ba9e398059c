#pragma once

#include <string>

#include "freedst/state_graph.hpp"

namespace testgraph {

// Block model: `domains` domain nodes, `per_block` slot-values per domain;
// each domain links its own block with p_in and other blocks with p_out.
inline freedst::StateGraph planted(std::size_t domains, std::size_t per_block, double p_in, double p_out,
                                   std::uint64_t seed) {
  freedst::StateGraph g;
  freedst::Rng rng(seed);
  for (std::size_t d = 0; d < domains; ++d) g.add_domain("d" + std::to_string(d));
  for (std::size_t b = 0; b < domains; ++b) {
    for (std::size_t v = 0; v < per_block; ++v) {
      const auto sv = g.add_slot_value("s" + std::to_string(b), "v" + std::to_string(v));
      for (std::size_t d = 0; d < domains; ++d) {
        if (rng.uniform01() < (d == b ? p_in : p_out)) g.add_edge(d, sv);
      }
    }
  }
  return g;
}

// Random bipartite graph with at least one edge per slot-value.
inline freedst::StateGraph random_bipartite(std::size_t domains, std::size_t slot_values, double p,
                                            std::uint64_t seed) {
  freedst::StateGraph g;
  freedst::Rng rng(seed);
  for (std::size_t d = 0; d < domains; ++d) g.add_domain("d" + std::to_string(d));
  for (std::size_t v = 0; v < slot_values; ++v) {
    const auto sv = g.add_slot_value("s", "v" + std::to_string(v));
    g.add_edge(rng.uniform_index(domains), sv);
    for (std::size_t d = 0; d < domains; ++d) {
      if (rng.uniform01() < p) g.add_edge(d, sv);
    }
  }
  return g;
}

}  // namespace testgraph
