#pragma once

// Shared test fixtures: loaders for the graph corpus under data/graphs and a
// few small hand-built graphs used across suites.

#include <string>
#include <vector>

#include "sgid/graph.hpp"
#include "sgid/json_io.hpp"

#ifndef SGID_DATA_DIR
#error "SGID_DATA_DIR must point at the repository data directory"
#endif

namespace fixtures {

inline sgid::MixedGraph load(const std::string& name) {
  return sgid::load_graph(std::string(SGID_DATA_DIR) + "/graphs/" + name +
                          ".json");
}

inline std::string data_path(const std::string& relative) {
  return std::string(SGID_DATA_DIR) + "/" + relative;
}

// C -> A -> Y chain, all binary.
inline sgid::MixedGraph chain_cay() {
  sgid::MixedGraph g;
  g.add_vertex("A");
  g.add_vertex("C");
  g.add_vertex("Y");
  g.add_edge("C", "A", sgid::EdgeKind::directed);
  g.add_edge("A", "Y", sgid::EdgeKind::directed);
  return g;
}

// W -> X - Y -> W: the Lemma 1 forbidden substructure with a partially
// directed cycle through the block {X, Y}.
inline sgid::MixedGraph pd_cycle_wxy() {
  sgid::MixedGraph g;
  g.add_vertex("W");
  g.add_vertex("X");
  g.add_vertex("Y");
  g.add_edge("W", "X", sgid::EdgeKind::directed);
  g.add_edge("X", "Y", sgid::EdgeKind::undirected);
  g.add_edge("Y", "W", sgid::EdgeKind::directed);
  return g;
}

}  // namespace fixtures
