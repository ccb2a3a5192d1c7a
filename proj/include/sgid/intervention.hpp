#pragma once

// Policy interventions on segregated graphs: policy and policy-set types,
// the induced-dependence relation between targets, the segregation-
// preservation check, and the graph rewrite producing the post-intervention
// graph G_fA.
//
// The rewrite runs per target A: every undirected edge V - A is reoriented
// to A -> V, every edge into A (directed or bidirected) is removed, and
// Z_A -> A edges are added.  A final pass replaces every mutual directed
// pair with an undirected edge.  Each target's step only touches edges at
// that target, so the per-target processing order does not matter.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgid/common.hpp"
#include "sgid/graph.hpp"
#include "sgid/table.hpp"

namespace sgid {

enum class MechanismKind {
  cpt,       // explicit stochastic table over (inputs, target)
  constant,  // fixed target state, the atomic do(A = a) case
  function,  // named function resolved by the evaluation or experiments layer
};

struct PolicyMechanism {
  MechanismKind kind = MechanismKind::constant;
  Table cpt;              // kind == cpt: variables = inputs + {target}
  int constant_value = 0; // kind == constant
  std::string tag;        // kind == function
  bool deterministic = true;

  static PolicyMechanism make_constant(int value) {
    PolicyMechanism m;
    m.kind = MechanismKind::constant;
    m.constant_value = value;
    m.deterministic = true;
    return m;
  }

  static PolicyMechanism make_cpt(Table table) {
    PolicyMechanism m;
    m.kind = MechanismKind::cpt;
    m.deterministic = true;
    for (double v : table.values()) {
      if (v != 0.0 && v != 1.0) {
        m.deterministic = false;
        break;
      }
    }
    m.cpt = std::move(table);
    return m;
  }

  static PolicyMechanism make_function(std::string name, bool deterministic) {
    PolicyMechanism m;
    m.kind = MechanismKind::function;
    m.tag = std::move(name);
    m.deterministic = deterministic;
    return m;
  }
};

struct Policy {
  std::string target;
  VertexSet inputs;  // Z_A
  PolicyMechanism mechanism;
};

struct PolicySet {
  std::vector<Policy> policies;

  VertexSet targets() const {
    VertexSet out;
    for (const auto& p : policies) out.insert(p.target);
    return out;
  }

  bool has_target(const std::string& name) const {
    return contains(targets(), name);
  }

  const Policy& policy_for(const std::string& target) const {
    for (const auto& p : policies) {
      if (p.target == target) return p;
    }
    throw PolicyError("no policy for target '" + target + "'");
  }

  bool all_deterministic() const {
    for (const auto& p : policies) {
      if (!p.mechanism.deterministic) return false;
    }
    return true;
  }
};

// Structural validation against a graph: targets distinct, random, and
// observed; inputs observed random vertices; no self-inputs; mechanism
// signatures match the declared inputs.
inline void validate_policy_set(const PolicySet& ps, const MixedGraph& g) {
  VertexSet seen;
  for (const auto& p : ps.policies) {
    if (!g.has_vertex(p.target)) {
      throw PolicyError("unknown policy target '" + p.target + "'");
    }
    if (g.is_latent(p.target) || g.is_fixed(p.target)) {
      throw PolicyError("policy target '" + p.target +
                        "' must be an observed random vertex");
    }
    if (!seen.insert(p.target).second) {
      throw PolicyError("duplicate policy target '" + p.target + "'");
    }
    if (contains(p.inputs, p.target)) {
      throw PolicyError("policy for '" + p.target +
                        "' lists itself as an input");
    }
    for (const auto& z : p.inputs) {
      if (!g.has_vertex(z)) {
        throw PolicyError("policy input '" + z + "' is not a vertex");
      }
      if (g.is_latent(z) || g.is_fixed(z)) {
        throw PolicyError("policy input '" + z +
                          "' must be an observed random vertex");
      }
    }
    switch (p.mechanism.kind) {
      case MechanismKind::constant: {
        if (!p.inputs.empty()) {
          throw PolicyError("constant policy for '" + p.target +
                            "' cannot take inputs");
        }
        const int card = g.vertex(p.target).cardinality;
        if (p.mechanism.constant_value < 0 ||
            p.mechanism.constant_value >= card) {
          throw PolicyError("constant value out of range for '" + p.target +
                            "'");
        }
        break;
      }
      case MechanismKind::cpt: {
        VertexSet expected = p.inputs;
        expected.insert(p.target);
        if (p.mechanism.cpt.variable_set() != expected) {
          throw PolicyError("policy table for '" + p.target +
                            "' must range over exactly {" +
                            join(expected, ",") + "}");
        }
        const Table row_sums = p.mechanism.cpt.marginal(p.inputs);
        for (double v : row_sums.values()) {
          if (std::abs(v - 1.0) > 1e-9) {
            throw PolicyError("policy table rows for '" + p.target +
                              "' must sum to 1");
          }
        }
        break;
      }
      case MechanismKind::function:
        if (p.mechanism.tag.empty()) {
          throw PolicyError("function policy for '" + p.target +
                            "' needs a name");
        }
        break;
    }
  }
}

namespace detail {

// Post-intervention functional-dependence digraph: a target's equation reads
// exactly its Z set; every other vertex keeps reading its parents and
// undirected neighbors from g.
inline std::map<std::string, VertexSet> dependence_digraph(
    const PolicySet& ps, const MixedGraph& g) {
  const VertexSet targets = ps.targets();
  std::map<std::string, VertexSet> reads;
  for (const auto& v : g.random_vertices()) {
    if (contains(targets, v)) {
      reads[v] = ps.policy_for(v).inputs;
    } else {
      reads[v] = set_union_of(g.parents(v), g.neighbors(v));
    }
  }
  return reads;
}

}  // namespace detail

// The relation A_i triangle A_j: target A_i is made a function of target
// A_j, directly through Z_{A_i} or transitively through the equations of
// non-intervened vertices.  Returned as target -> set of targets it depends
// on (never including itself-only pairs of distinct targets matter).
inline std::map<std::string, VertexSet> induced_dependence(
    const PolicySet& ps, const MixedGraph& g) {
  validate_policy_set(ps, g);
  const VertexSet targets = ps.targets();
  const auto reads = detail::dependence_digraph(ps, g);

  std::map<std::string, VertexSet> out;
  for (const auto& a : targets) {
    // Forward reachability from a over the reads relation.
    VertexSet visited;
    std::vector<std::string> frontier{a};
    while (!frontier.empty()) {
      const std::string v = frontier.back();
      frontier.pop_back();
      auto it = reads.find(v);
      if (it == reads.end()) continue;
      for (const auto& next : it->second) {
        if (visited.insert(next).second) frontier.push_back(next);
      }
    }
    VertexSet deps = set_intersection_of(visited, targets);
    deps.erase(a);
    out[a] = deps;
  }
  return out;
}

struct SegregationCheck {
  bool ok = true;
  std::string witness;  // human-readable reason when not ok
};

// Small forbidden substructures from the closure argument: a directed
// 3-cycle, a directed cycle through one undirected edge, and a directed edge
// closing a 2-edge undirected path.  classify() subsumes these; scanning for
// them explicitly gives cheap independent evidence in tests.
inline std::optional<std::string> partially_directed_triangle_witness(
    const MixedGraph& g) {
  const VertexSet vs = g.random_vertices();
  auto dir = [&g](const std::string& a, const std::string& b) {
    return g.has_edge(a, b, EdgeKind::directed);
  };
  auto und = [&g](const std::string& a, const std::string& b) {
    return g.has_edge(a, b, EdgeKind::undirected);
  };
  for (const auto& w : vs) {
    for (const auto& x : vs) {
      if (x == w || !dir(w, x)) continue;
      for (const auto& y : vs) {
        if (y == w || y == x) continue;
        if (dir(x, y) && dir(y, w)) {
          return w + " -> " + x + " -> " + y + " -> " + w;
        }
        if (und(x, y) && dir(y, w)) {
          return w + " -> " + x + " - " + y + " -> " + w;
        }
        if (und(x, y) && und(y, w)) {
          return w + " -> " + x + " - " + y + " - " + w;
        }
      }
    }
  }
  return std::nullopt;
}

namespace detail {

// Procedure body without the segregation-preservation gate; used both by
// intervene_graph and by the checker itself.
inline MixedGraph intervene_graph_unchecked(const PolicySet& ps,
                                            const MixedGraph& g) {
  MixedGraph out = g;
  for (const auto& p : ps.policies) {
    const std::string& a = p.target;
    for (const auto& v : out.neighbors(a)) {
      out.remove_edge(a, v, EdgeKind::undirected);
      if (!out.has_edge(a, v, EdgeKind::directed)) {
        out.add_edge(a, v, EdgeKind::directed);
      }
    }
    for (const auto& v : out.parents(a)) {
      out.remove_edge(v, a, EdgeKind::directed);
    }
    for (const auto& v : out.spouses(a)) {
      out.remove_edge(v, a, EdgeKind::bidirected);
    }
    for (const auto& z : p.inputs) {
      if (!out.has_edge(z, a, EdgeKind::directed)) {
        out.add_edge(z, a, EdgeKind::directed);
      }
    }
  }
  // Mutual directed pairs collapse to undirected edges.
  std::vector<std::pair<std::string, std::string>> mutual;
  for (const auto& e : out.edges()) {
    if (e.kind == EdgeKind::directed && e.tail < e.head &&
        out.has_edge(e.head, e.tail, EdgeKind::directed)) {
      mutual.push_back({e.tail, e.head});
    }
  }
  for (const auto& [a, b] : mutual) {
    out.remove_edge(a, b, EdgeKind::directed);
    out.remove_edge(b, a, EdgeKind::directed);
    if (!out.has_edge(a, b, EdgeKind::undirected)) {
      out.add_edge(a, b, EdgeKind::undirected);
    }
  }
  return out;
}

}  // namespace detail

// Definition check for a valid policy set on an SG: (a) each Z_A avoids the
// strict exterior of its target, and (b) mutually dependent targets list
// each other explicitly.  The definition alone guarantees a segregated
// result; is_segregation_preserving layers a classification guard on top.
inline SegregationCheck satisfies_policy_definition(const PolicySet& ps,
                                                    const MixedGraph& g) {
  validate_policy_set(ps, g);
  if (!classify(g).is_sg) {
    throw PolicyError("segregation preservation is defined on SGs only");
  }
  SegregationCheck result;
  for (const auto& p : ps.policies) {
    const VertexSet forbidden = strict_exterior(g, {p.target});
    const VertexSet bad = set_intersection_of(p.inputs, forbidden);
    if (!bad.empty()) {
      result.ok = false;
      result.witness = "Z_" + p.target + " contains {" + join(bad, ",") +
                       "} from the strict exterior of " + p.target;
      return result;
    }
  }
  const auto dep = induced_dependence(ps, g);
  for (const auto& [ai, deps] : dep) {
    for (const auto& aj : deps) {
      if (!contains(dep.at(aj), ai)) continue;  // not mutual
      const bool listed = contains(ps.policy_for(ai).inputs, aj) &&
                          contains(ps.policy_for(aj).inputs, ai);
      if (!listed) {
        result.ok = false;
        result.witness = "targets " + ai + " and " + aj +
                         " are mutually dependent but not mutual inputs";
        return result;
      }
    }
  }
  return result;
}

inline SegregationCheck is_segregation_preserving(const PolicySet& ps,
                                                  const MixedGraph& g) {
  SegregationCheck result = satisfies_policy_definition(ps, g);
  if (!result.ok) return result;
  const Classification c =
      classify(detail::intervene_graph_unchecked(ps, g));
  if (!c.is_sg) {
    result.ok = false;
    result.witness = c.segregated
                         ? "intervened graph has a partially directed cycle"
                         : "intervened graph is not segregated at " +
                               c.segregation_witness.value_or("?");
  }
  return result;
}

// Post-intervention graph G_fA.  Requires a segregation-preserving policy
// set; the output always classifies as an SG.
inline MixedGraph intervene_graph(const PolicySet& ps, const MixedGraph& g) {
  const SegregationCheck check = is_segregation_preserving(ps, g);
  if (!check.ok) {
    throw PolicyError("policy set is not segregation preserving: " +
                      check.witness);
  }
  MixedGraph out = detail::intervene_graph_unchecked(ps, g);
  if (!classify(out).is_sg) {
    throw PolicyError("internal error: intervened graph is not an SG");
  }
  return out;
}

}  // namespace sgid
