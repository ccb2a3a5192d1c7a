#pragma once

// Mixed-graph core: vertices carrying discrete state-space sizes, edges of
// three kinds (directed, bidirected, undirected), and an optional context
// split of the vertex set into random and fixed vertices.  On top of the
// container sit the genealogical relations (parents through strict exterior),
// the block and district partitions, class predicates for the graph families
// the library handles (DAG, MRF, chain graph, ADMG, segregated graph, and
// conditional variants), block-aware topological orders, and the augmented
// (moralized) graph with its clique enumeration.
//
// Conventions used throughout:
//   - ancestors, descendants, district, anterior, and exterior are reflexive
//     (they contain the query vertices); parents, children, neighbors, and
//     spouses are not.
//   - relations that walk paths (ancestors, district, anterior, ...) walk
//     only among random vertices; parents of a random vertex may be fixed.
//   - symmetric edges are stored with endpoints in lexicographic order, and
//     every collection iterates in lexicographic order, so all derived
//     output is deterministic.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgid/common.hpp"

namespace sgid {

enum class EdgeKind { directed, bidirected, undirected };

inline std::string to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::directed: return "directed";
    case EdgeKind::bidirected: return "bidirected";
    case EdgeKind::undirected: return "undirected";
  }
  return "unknown";
}

inline EdgeKind edge_kind_from_string(const std::string& text) {
  if (text == "directed") return EdgeKind::directed;
  if (text == "bidirected") return EdgeKind::bidirected;
  if (text == "undirected") return EdgeKind::undirected;
  throw GraphError("unknown edge kind '" + text +
                   "' (expected directed, bidirected, or undirected)");
}

struct VertexInfo {
  std::string name;
  bool latent = false;
  int cardinality = 2;
};

struct Edge {
  std::string tail;
  std::string head;
  EdgeKind kind = EdgeKind::directed;

  friend bool operator<(const Edge& a, const Edge& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.tail != b.tail) return a.tail < b.tail;
    return a.head < b.head;
  }
  friend bool operator==(const Edge& a, const Edge& b) {
    return a.kind == b.kind && a.tail == b.tail && a.head == b.head;
  }
};

class MixedGraph {
 public:
  MixedGraph() = default;

  void add_vertex(const VertexInfo& info) {
    if (info.name.empty()) throw GraphError("vertex name must be non-empty");
    if (info.name.back() == '\'') {
      // Trailing primes are reserved for bound-variable renaming in symbolic
      // estimands; a vertex named "X'" would collide with the dummy for "X".
      throw GraphError("vertex name '" + info.name +
                       "' must not end with a prime");
    }
    if (vertices_.count(info.name) != 0) {
      throw GraphError("duplicate vertex '" + info.name + "'");
    }
    if (info.cardinality < 2) {
      throw GraphError("vertex '" + info.name +
                       "' must have cardinality >= 2, got " +
                       std::to_string(info.cardinality));
    }
    vertices_.emplace(info.name, info);
  }

  void add_vertex(const std::string& name, bool latent = false,
                  int cardinality = 2) {
    add_vertex(VertexInfo{name, latent, cardinality});
  }

  // Symmetric edges are canonicalized to lexicographic endpoint order.  At
  // most one edge of each kind may join a pair, but a pair may carry several
  // kinds at once (for example both a directed and a bidirected edge).
  void add_edge(const std::string& tail, const std::string& head,
                EdgeKind kind) {
    require_vertex(tail);
    require_vertex(head);
    if (tail == head) {
      throw GraphError("self loop at '" + tail + "' is not allowed");
    }
    Edge edge = canonical_edge(tail, head, kind);
    if (edges_.count(edge) != 0) {
      throw GraphError("duplicate " + to_string(kind) + " edge between '" +
                       tail + "' and '" + head + "'");
    }
    check_context_edge(edge);
    edges_.insert(edge);
  }

  bool has_edge(const std::string& tail, const std::string& head,
                EdgeKind kind) const {
    return edges_.count(canonical_edge(tail, head, kind)) != 0;
  }

  void remove_edge(const std::string& tail, const std::string& head,
                   EdgeKind kind) {
    Edge edge = canonical_edge(tail, head, kind);
    if (edges_.erase(edge) == 0) {
      throw GraphError("cannot remove missing " + to_string(kind) +
                       " edge between '" + tail + "' and '" + head + "'");
    }
  }

  // Declares the context split.  Fixed vertices act as conditioning context:
  // no edge may point into a fixed vertex from a random one, and symmetric
  // edges may not join fixed and random vertices.  Edges wholly between
  // fixed vertices are permitted (they are display-only context structure).
  void set_fixed(const VertexSet& fixed) {
    for (const auto& name : fixed) {
      require_vertex(name);
      if (vertices_.at(name).latent) {
        throw GraphError("latent vertex '" + name + "' cannot be fixed");
      }
    }
    VertexSet previous = fixed_;
    fixed_ = fixed;
    for (const auto& edge : edges_) {
      try {
        check_context_edge(edge);
      } catch (const GraphError&) {
        fixed_ = previous;
        throw;
      }
    }
  }

  bool has_vertex(const std::string& name) const {
    return vertices_.count(name) != 0;
  }

  const VertexInfo& vertex(const std::string& name) const {
    require_vertex(name);
    return vertices_.at(name);
  }

  bool is_fixed(const std::string& name) const {
    require_vertex(name);
    return contains(fixed_, name);
  }

  bool is_latent(const std::string& name) const { return vertex(name).latent; }

  VertexSet vertex_names() const {
    VertexSet out;
    for (const auto& [name, info] : vertices_) out.insert(name);
    return out;
  }

  VertexSet random_vertices() const {
    return set_difference_of(vertex_names(), fixed_);
  }

  const VertexSet& fixed_vertices() const { return fixed_; }

  VertexSet latent_vertices() const {
    VertexSet out;
    for (const auto& [name, info] : vertices_) {
      if (info.latent) out.insert(name);
    }
    return out;
  }

  VertexSet observed_vertices() const {
    VertexSet out;
    for (const auto& [name, info] : vertices_) {
      if (!info.latent) out.insert(name);
    }
    return out;
  }

  const std::set<Edge>& edges() const { return edges_; }

  std::size_t vertex_count() const { return vertices_.size(); }

  VertexSet parents(const std::string& v) const {
    require_vertex(v);
    VertexSet out;
    for (const auto& e : edges_) {
      if (e.kind == EdgeKind::directed && e.head == v) out.insert(e.tail);
    }
    return out;
  }

  VertexSet children(const std::string& v) const {
    require_vertex(v);
    VertexSet out;
    for (const auto& e : edges_) {
      if (e.kind == EdgeKind::directed && e.tail == v) out.insert(e.head);
    }
    return out;
  }

  VertexSet neighbors(const std::string& v) const {
    return symmetric_partners(v, EdgeKind::undirected);
  }

  VertexSet spouses(const std::string& v) const {
    return symmetric_partners(v, EdgeKind::bidirected);
  }

  VertexSet parents_of_set(const VertexSet& s) const {
    VertexSet out;
    for (const auto& v : s) {
      VertexSet pa = parents(v);
      out.insert(pa.begin(), pa.end());
    }
    return out;
  }

  // Parents of the set that lie strictly outside it.
  VertexSet strict_parents_of_set(const VertexSet& s) const {
    return set_difference_of(parents_of_set(s), s);
  }

 private:
  static Edge canonical_edge(const std::string& tail, const std::string& head,
                             EdgeKind kind) {
    if (kind != EdgeKind::directed && head < tail) {
      return Edge{head, tail, kind};
    }
    return Edge{tail, head, kind};
  }

  void require_vertex(const std::string& name) const {
    if (vertices_.count(name) == 0) {
      throw GraphError("unknown vertex '" + name + "'");
    }
  }

  void check_context_edge(const Edge& edge) const {
    if (fixed_.empty()) return;
    const bool tail_fixed = contains(fixed_, edge.tail);
    const bool head_fixed = contains(fixed_, edge.head);
    if (tail_fixed == head_fixed) return;
    if (edge.kind == EdgeKind::directed) {
      if (head_fixed) {
        throw GraphError("directed edge " + edge.tail + " -> " + edge.head +
                         " points into fixed vertex '" + edge.head + "'");
      }
      return;  // fixed -> random is the one permitted mixed-status edge
    }
    throw GraphError(to_string(edge.kind) + " edge between '" + edge.tail +
                     "' and '" + edge.head +
                     "' joins a fixed and a random vertex");
  }

  VertexSet symmetric_partners(const std::string& v, EdgeKind kind) const {
    require_vertex(v);
    VertexSet out;
    for (const auto& e : edges_) {
      if (e.kind != kind) continue;
      if (e.tail == v) out.insert(e.head);
      if (e.head == v) out.insert(e.tail);
    }
    return out;
  }

  std::map<std::string, VertexInfo> vertices_;
  std::set<Edge> edges_;
  VertexSet fixed_;
};

// ---------------------------------------------------------------------------
// Genealogical relations.

enum class Relation {
  parents,
  children,
  ancestors,
  descendants,
  neighbors,
  non_descendants,
  district,
  anterior,
  exterior,
  strict_exterior,
};

inline Relation relation_from_string(const std::string& text) {
  if (text == "parents") return Relation::parents;
  if (text == "children") return Relation::children;
  if (text == "ancestors") return Relation::ancestors;
  if (text == "descendants") return Relation::descendants;
  if (text == "neighbors") return Relation::neighbors;
  if (text == "non-descendants") return Relation::non_descendants;
  if (text == "district") return Relation::district;
  if (text == "anterior") return Relation::anterior;
  if (text == "exterior") return Relation::exterior;
  if (text == "strict-exterior") return Relation::strict_exterior;
  throw GraphError("unknown relation '" + text + "'");
}

namespace detail {

// Generic reflexive closure over a step function restricted to random
// vertices.  Used for all path-walking relations.
template <typename StepFn>
VertexSet closure_among_random(const MixedGraph& g, const VertexSet& seed,
                               StepFn step) {
  const VertexSet random = g.random_vertices();
  VertexSet visited;
  std::vector<std::string> frontier;
  for (const auto& v : seed) {
    if (!contains(random, v)) {
      throw GraphError("relation seed '" + v + "' is not a random vertex");
    }
    visited.insert(v);
    frontier.push_back(v);
  }
  while (!frontier.empty()) {
    const std::string v = frontier.back();
    frontier.pop_back();
    for (const auto& next : step(v)) {
      if (!contains(random, next)) continue;
      if (visited.insert(next).second) frontier.push_back(next);
    }
  }
  return visited;
}

}  // namespace detail

inline VertexSet ancestors(const MixedGraph& g, const VertexSet& seed) {
  return detail::closure_among_random(
      g, seed, [&g](const std::string& v) { return g.parents(v); });
}

inline VertexSet descendants(const MixedGraph& g, const VertexSet& seed) {
  return detail::closure_among_random(
      g, seed, [&g](const std::string& v) { return g.children(v); });
}

inline VertexSet district_of(const MixedGraph& g, const VertexSet& seed) {
  return detail::closure_among_random(
      g, seed, [&g](const std::string& v) { return g.spouses(v); });
}

inline VertexSet undirected_component(const MixedGraph& g,
                                      const VertexSet& seed) {
  return detail::closure_among_random(
      g, seed, [&g](const std::string& v) { return g.neighbors(v); });
}

// Anterior: vertices with a partially directed path into the seed, walking
// directed edges tailward and undirected edges both ways.
inline VertexSet anterior(const MixedGraph& g, const VertexSet& seed) {
  return detail::closure_among_random(g, seed, [&g](const std::string& v) {
    return set_union_of(g.parents(v), g.neighbors(v));
  });
}

// Exterior: vertices reachable from the seed along partially directed paths,
// walking directed edges headward and undirected edges both ways.
inline VertexSet exterior(const MixedGraph& g, const VertexSet& seed) {
  return detail::closure_among_random(g, seed, [&g](const std::string& v) {
    return set_union_of(g.children(v), g.neighbors(v));
  });
}

// Strict exterior: the exterior with the seed and its whole undirected
// component removed.  Policy input sets are constrained to its complement.
inline VertexSet strict_exterior(const MixedGraph& g, const VertexSet& seed) {
  return set_difference_of(exterior(g, seed),
                           undirected_component(g, seed));
}

inline VertexSet relatives(const MixedGraph& g, const VertexSet& seed,
                           Relation kind) {
  switch (kind) {
    case Relation::parents: {
      VertexSet out;
      for (const auto& v : seed) {
        VertexSet pa = g.parents(v);
        out.insert(pa.begin(), pa.end());
      }
      return out;
    }
    case Relation::children: {
      VertexSet out;
      for (const auto& v : seed) {
        VertexSet ch = g.children(v);
        out.insert(ch.begin(), ch.end());
      }
      return out;
    }
    case Relation::neighbors: {
      VertexSet out;
      for (const auto& v : seed) {
        VertexSet nb = g.neighbors(v);
        out.insert(nb.begin(), nb.end());
      }
      return out;
    }
    case Relation::ancestors: return ancestors(g, seed);
    case Relation::descendants: return descendants(g, seed);
    case Relation::non_descendants:
      return set_difference_of(g.random_vertices(), descendants(g, seed));
    case Relation::district: return district_of(g, seed);
    case Relation::anterior: return anterior(g, seed);
    case Relation::exterior: return exterior(g, seed);
    case Relation::strict_exterior: return strict_exterior(g, seed);
  }
  throw GraphError("unhandled relation kind");
}

// ---------------------------------------------------------------------------
// Blocks and districts.

struct Block {
  VertexSet members;
  bool nontrivial = false;  // true iff the block has at least two members
};

// Blocks: connected components of the undirected part among random vertices.
// Sorted by smallest member so the partition order is deterministic.
inline std::vector<Block> blocks(const MixedGraph& g) {
  std::vector<Block> out;
  VertexSet remaining = g.random_vertices();
  while (!remaining.empty()) {
    const std::string v = *remaining.begin();
    VertexSet component = undirected_component(g, {v});
    out.push_back(Block{component, component.size() > 1});
    remaining = set_difference_of(remaining, component);
  }
  return out;
}

inline std::vector<VertexSet> nontrivial_blocks(const MixedGraph& g) {
  std::vector<VertexSet> out;
  for (const auto& block : blocks(g)) {
    if (block.nontrivial) out.push_back(block.members);
  }
  return out;
}

// Union of all nontrivial blocks (the block side of the vertex partition).
inline VertexSet block_vertices(const MixedGraph& g) {
  VertexSet out;
  for (const auto& block : nontrivial_blocks(g)) {
    out.insert(block.begin(), block.end());
  }
  return out;
}

// The district side of the partition: random vertices in trivial blocks.
inline VertexSet district_vertices(const MixedGraph& g) {
  return set_difference_of(g.random_vertices(), block_vertices(g));
}

// Districts: connected components of the bidirected part among random
// vertices outside nontrivial blocks.  The walk itself is restricted to that
// vertex set so the partition is well defined even on non-segregated input.
// Sorted by smallest member.
inline std::vector<VertexSet> districts(const MixedGraph& g) {
  std::vector<VertexSet> out;
  const VertexSet universe = district_vertices(g);
  VertexSet remaining = universe;
  while (!remaining.empty()) {
    const std::string start = *remaining.begin();
    VertexSet component{start};
    std::vector<std::string> frontier{start};
    while (!frontier.empty()) {
      const std::string v = frontier.back();
      frontier.pop_back();
      for (const auto& s : g.spouses(v)) {
        if (contains(universe, s) && component.insert(s).second) {
          frontier.push_back(s);
        }
      }
    }
    out.push_back(component);
    remaining = set_difference_of(remaining, component);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification.

enum class GraphClass { DAG, MRF, CG, ADMG, CADMG, CCG, SG };

inline std::string to_string(GraphClass c) {
  switch (c) {
    case GraphClass::DAG: return "DAG";
    case GraphClass::MRF: return "MRF";
    case GraphClass::CG: return "CG";
    case GraphClass::ADMG: return "ADMG";
    case GraphClass::CADMG: return "CADMG";
    case GraphClass::CCG: return "CCG";
    case GraphClass::SG: return "SG";
  }
  return "unknown";
}

struct Classification {
  // A vertex with both an undirected and a bidirected incident edge breaks
  // segregation; the first such vertex (lexicographically) is the witness.
  bool segregated = true;
  std::optional<std::string> segregation_witness;

  // Partially directed cycles are detected by contracting every undirected
  // component to a super-node and looking for a directed cycle among the
  // super-nodes.  The witness lists the blocks on one such cycle.
  bool partially_directed_acyclic = true;
  std::vector<VertexSet> cycle_witness;

  bool is_dag = false;
  bool is_mrf = false;
  bool is_cg = false;
  bool is_admg = false;
  bool is_cadmg = false;
  bool is_ccg = false;
  bool is_sg = false;

  // Most specific class that applies, if any.
  std::optional<GraphClass> graph_class;
};

namespace detail {

// Maps each random vertex to the index of its block, in blocks(g) order.
inline std::map<std::string, std::size_t> block_index(
    const std::vector<Block>& partition) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    for (const auto& v : partition[i].members) out.emplace(v, i);
  }
  return out;
}

}  // namespace detail

// Topological order of the blocks under the directed edges between them.
// Ties are broken by the lexicographically smallest block member, which also
// fixes the library's global vertex order.  Throws on a partially directed
// cycle.
inline std::vector<VertexSet> block_topological_order(const MixedGraph& g) {
  const std::vector<Block> partition = blocks(g);
  const auto index = detail::block_index(partition);
  const std::size_t n = partition.size();

  std::vector<std::set<std::size_t>> succ(n);
  std::vector<std::size_t> pending(n, 0);
  for (const auto& e : g.edges()) {
    if (e.kind != EdgeKind::directed) continue;
    auto tail_it = index.find(e.tail);
    auto head_it = index.find(e.head);
    if (tail_it == index.end() || head_it == index.end()) continue;  // context
    const std::size_t a = tail_it->second;
    const std::size_t b = head_it->second;
    if (a == b) {
      throw GraphError("partially directed cycle: directed edge " + e.tail +
                       " -> " + e.head + " lies inside the block {" +
                       join(partition[a].members, ",") + "}");
    }
    if (succ[a].insert(b).second) ++pending[b];
  }

  // Kahn's algorithm over blocks; the ready set is keyed by smallest member
  // so extraction order is deterministic.
  std::set<std::pair<std::string, std::size_t>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.insert({*partition[i].members.begin(), i});
  }
  std::vector<VertexSet> order;
  while (!ready.empty()) {
    const std::size_t i = ready.begin()->second;
    ready.erase(ready.begin());
    order.push_back(partition[i].members);
    for (const std::size_t j : succ[i]) {
      if (--pending[j] == 0) ready.insert({*partition[j].members.begin(), j});
    }
  }
  if (order.size() != n) {
    std::vector<VertexSet> on_cycle;
    for (std::size_t i = 0; i < n; ++i) {
      if (pending[i] > 0) on_cycle.push_back(partition[i].members);
    }
    std::vector<std::string> labels;
    for (const auto& members : on_cycle) labels.push_back(join(members, ","));
    throw GraphError("partially directed cycle among blocks {" +
                     join(labels, "} {") + "}");
  }
  return order;
}

// Global vertex order: block-topological order refined lexicographically
// within each block.  This is the order all chain-rule expansions use.
inline std::vector<std::string> vertex_order(const MixedGraph& g) {
  std::vector<std::string> out;
  for (const auto& block : block_topological_order(g)) {
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

inline Classification classify(const MixedGraph& g) {
  Classification result;

  bool any_directed = false;
  bool any_bidirected = false;
  bool any_undirected = false;
  const VertexSet random = g.random_vertices();
  for (const auto& e : g.edges()) {
    // Edges wholly inside the fixed context are display-only.
    if (!contains(random, e.tail) && !contains(random, e.head)) continue;
    switch (e.kind) {
      case EdgeKind::directed: any_directed = true; break;
      case EdgeKind::bidirected: any_bidirected = true; break;
      case EdgeKind::undirected: any_undirected = true; break;
    }
  }

  for (const auto& v : random) {
    if (!g.neighbors(v).empty() && !g.spouses(v).empty()) {
      result.segregated = false;
      result.segregation_witness = v;
      break;
    }
  }

  try {
    block_topological_order(g);
  } catch (const GraphError&) {
    result.partially_directed_acyclic = false;
    const std::vector<Block> partition = blocks(g);
    const auto index = detail::block_index(partition);
    // Record the blocks that cannot be ordered as the cycle witness.
    std::vector<std::set<std::size_t>> succ(partition.size());
    std::vector<std::size_t> pending(partition.size(), 0);
    for (const auto& e : g.edges()) {
      if (e.kind != EdgeKind::directed) continue;
      auto tail_it = index.find(e.tail);
      auto head_it = index.find(e.head);
      if (tail_it == index.end() || head_it == index.end()) continue;
      if (tail_it->second == head_it->second) {
        result.cycle_witness.push_back(partition[tail_it->second].members);
      } else if (succ[tail_it->second].insert(head_it->second).second) {
        ++pending[head_it->second];
      }
    }
    if (result.cycle_witness.empty()) {
      std::set<std::size_t> ready;
      for (std::size_t i = 0; i < partition.size(); ++i) {
        if (pending[i] == 0) ready.insert(i);
      }
      while (!ready.empty()) {
        const std::size_t i = *ready.begin();
        ready.erase(ready.begin());
        for (const std::size_t j : succ[i]) {
          if (--pending[j] == 0) ready.insert(j);
        }
      }
      for (std::size_t i = 0; i < partition.size(); ++i) {
        if (pending[i] > 0) result.cycle_witness.push_back(partition[i].members);
      }
    }
  }

  const bool has_context = !g.fixed_vertices().empty();
  const bool acyclic = result.partially_directed_acyclic;

  result.is_dag =
      acyclic && !any_bidirected && !any_undirected && !has_context;
  result.is_mrf = !any_directed && !any_bidirected && !has_context;
  result.is_cg = acyclic && !any_bidirected && !has_context;
  result.is_admg = acyclic && !any_undirected && !has_context;
  result.is_cadmg = acyclic && !any_undirected && has_context;
  result.is_ccg = acyclic && !any_bidirected && has_context;
  result.is_sg = acyclic && result.segregated;

  if (result.is_dag) {
    result.graph_class = GraphClass::DAG;
  } else if (result.is_mrf) {
    result.graph_class = GraphClass::MRF;
  } else if (result.is_cg) {
    result.graph_class = GraphClass::CG;
  } else if (result.is_admg) {
    result.graph_class = GraphClass::ADMG;
  } else if (result.is_ccg) {
    result.graph_class = GraphClass::CCG;
  } else if (result.is_cadmg) {
    result.graph_class = GraphClass::CADMG;
  } else if (result.is_sg) {
    result.graph_class = GraphClass::SG;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Subgraphs and derived graphs.

inline MixedGraph induced_subgraph(const MixedGraph& g, const VertexSet& keep) {
  MixedGraph out;
  VertexSet fixed;
  for (const auto& name : keep) {
    out.add_vertex(g.vertex(name));
    if (g.is_fixed(name)) fixed.insert(name);
  }
  for (const auto& e : g.edges()) {
    if (contains(keep, e.tail) && contains(keep, e.head)) {
      out.add_edge(e.tail, e.head, e.kind);
    }
  }
  out.set_fixed(fixed);
  return out;
}

// Conditional graph with the given random/fixed split: keeps all edges among
// random vertices, directed edges from fixed into random, and edges wholly
// inside the fixed side (context structure); drops edges that would point
// into the fixed side from the random side.
inline MixedGraph conditional_graph(const MixedGraph& g,
                                    const VertexSet& random,
                                    const VertexSet& fixed) {
  MixedGraph out;
  for (const auto& name : set_union_of(random, fixed)) {
    out.add_vertex(g.vertex(name));
  }
  for (const auto& e : g.edges()) {
    const bool tail_random = contains(random, e.tail);
    const bool head_random = contains(random, e.head);
    const bool tail_fixed = contains(fixed, e.tail);
    const bool head_fixed = contains(fixed, e.head);
    if (tail_random && head_random) {
      out.add_edge(e.tail, e.head, e.kind);
    } else if (tail_fixed && head_fixed) {
      out.add_edge(e.tail, e.head, e.kind);
    } else if (e.kind == EdgeKind::directed && tail_fixed && head_random) {
      out.add_edge(e.tail, e.head, e.kind);
    }
    // Everything else points into the fixed side and is dropped.
  }
  out.set_fixed(fixed);
  return out;
}

// Augmented (moral) graph of one block: undirected edges within the block,
// parent-child edges undirected, and the block's parents married pairwise.
inline MixedGraph augmented_graph(const MixedGraph& g, const VertexSet& block) {
  for (const auto& v : block) {
    if (!g.has_vertex(v)) throw GraphError("unknown vertex '" + v + "'");
  }
  const VertexSet parents = g.strict_parents_of_set(block);
  MixedGraph out;
  for (const auto& v : set_union_of(block, parents)) out.add_vertex(g.vertex(v));

  auto connect = [&out](const std::string& a, const std::string& b) {
    if (a != b && !out.has_edge(a, b, EdgeKind::undirected)) {
      out.add_edge(a, b, EdgeKind::undirected);
    }
  };
  for (const auto& e : g.edges()) {
    if (e.kind == EdgeKind::undirected && contains(block, e.tail) &&
        contains(block, e.head)) {
      connect(e.tail, e.head);
    }
    if (e.kind == EdgeKind::directed && contains(block, e.head) &&
        (contains(block, e.tail) || contains(parents, e.tail))) {
      connect(e.tail, e.head);
    }
  }
  for (auto it_a = parents.begin(); it_a != parents.end(); ++it_a) {
    for (auto it_b = std::next(it_a); it_b != parents.end(); ++it_b) {
      connect(*it_a, *it_b);
    }
  }
  return out;
}

// Maximal cliques of the undirected part, via Bron-Kerbosch.  Recursion
// explores candidates in lexicographic order and the result is sorted, so
// the output is deterministic.
inline std::vector<VertexSet> cliques(const MixedGraph& g) {
  const VertexSet all = g.vertex_names();
  std::vector<VertexSet> found;

  // Plain Bron-Kerbosch; graphs here are small (blocks plus their parents).
  struct Search {
    const MixedGraph& g;
    std::vector<VertexSet>& found;
    void run(VertexSet r, VertexSet p, VertexSet x) {
      if (p.empty() && x.empty()) {
        found.push_back(r);
        return;
      }
      while (!p.empty()) {
        const std::string v = *p.begin();
        const VertexSet nb = g.neighbors(v);
        VertexSet r2 = r;
        r2.insert(v);
        run(std::move(r2), set_intersection_of(p, nb),
            set_intersection_of(x, nb));
        p.erase(v);
        x.insert(v);
      }
    }
  };
  Search{g, found}.run({}, all, {});

  std::sort(found.begin(), found.end());
  return found;
}

}  // namespace sgid
