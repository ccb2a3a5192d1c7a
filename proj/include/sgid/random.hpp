#pragma once

// Seeded random instances for property tests and validation harnesses:
// graphs from every class the identification algorithms accept, policy sets
// satisfying the intervention validity definition, and positive conditional
// tables.  Everything draws through sgid::Rng, so a master seed pins each
// instance exactly.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "sgid/common.hpp"
#include "sgid/graph.hpp"
#include "sgid/intervention.hpp"
#include "sgid/rng.hpp"
#include "sgid/table.hpp"

namespace sgid {

inline std::vector<std::string> indexed_names(const std::string& stem, int n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

// DAG on V1..Vn: each forward pair carries a directed edge with probability
// p_dir, so insertion order is a topological order.
inline MixedGraph random_dag(Rng& rng, int n, double p_dir) {
  const auto names = indexed_names("V", n);
  MixedGraph g;
  for (const auto& v : names) g.add_vertex(v);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p_dir)) {
        g.add_edge(names[i], names[j], EdgeKind::directed);
      }
    }
  }
  return g;
}

// ADMG: a random DAG plus bidirected edges on forward pairs.
inline MixedGraph random_admg(Rng& rng, int n, double p_dir, double p_bi) {
  MixedGraph g = random_dag(rng, n, p_dir);
  const auto names = indexed_names("V", n);
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      if (rng.bernoulli(p_bi)) {
        g.add_edge(names[i], names[j], EdgeKind::bidirected);
      }
    }
  }
  return g;
}

namespace detail {

// Consecutive vertices grouped into runs of size 1..3; the grouping is the
// block structure of the chain and segregated generators below.
inline std::vector<std::vector<std::string>> random_groups(
    Rng& rng, const std::vector<std::string>& names) {
  std::vector<std::vector<std::string>> groups;
  for (const auto& v : names) {
    const bool extend = !groups.empty() && groups.back().size() < 3 &&
                        rng.bernoulli(0.45);
    if (extend) {
      groups.back().push_back(v);
    } else {
      groups.push_back({v});
    }
  }
  return groups;
}

// Undirected path through the group plus extra chords; directed edges only
// from earlier groups into later ones, so no partially directed cycle can
// arise.
inline MixedGraph grouped_graph(Rng& rng,
                                const std::vector<std::vector<std::string>>& groups,
                                double p_dir) {
  MixedGraph g;
  for (const auto& group : groups) {
    for (const auto& v : group) g.add_vertex(v);
  }
  for (const auto& group : groups) {
    for (std::size_t i = 0; i + 1 < group.size(); ++i) {
      g.add_edge(group[i], group[i + 1], EdgeKind::undirected);
    }
    if (group.size() == 3 && rng.bernoulli(0.3)) {
      g.add_edge(group[0], group[2], EdgeKind::undirected);
    }
  }
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      for (const auto& tail : groups[a]) {
        for (const auto& head : groups[b]) {
          if (rng.bernoulli(p_dir)) {
            g.add_edge(tail, head, EdgeKind::directed);
          }
        }
      }
    }
  }
  return g;
}

}  // namespace detail

// Chain graph: random block structure, directed edges between blocks only.
inline MixedGraph random_cg(Rng& rng, int n, double p_dir) {
  return detail::grouped_graph(rng, detail::random_groups(rng, indexed_names("V", n)),
                               p_dir);
}

// Segregated graph: a chain graph plus bidirected edges confined to vertices
// outside nontrivial blocks, which preserves segregation by construction.
inline MixedGraph random_sg(Rng& rng, int n, double p_dir, double p_bi) {
  const auto groups = detail::random_groups(rng, indexed_names("V", n));
  MixedGraph g = detail::grouped_graph(rng, groups, p_dir);
  std::vector<std::string> singles;
  for (const auto& group : groups) {
    if (group.size() == 1) singles.push_back(group.front());
  }
  for (std::size_t i = 0; i < singles.size(); ++i) {
    for (std::size_t j = i + 1; j < singles.size(); ++j) {
      if (rng.bernoulli(p_bi)) {
        g.add_edge(singles[i], singles[j], EdgeKind::bidirected);
      }
    }
  }
  return g;
}

// Policy set satisfying the validity definition on g: input sets avoid each
// target's strict exterior and mutually dependent targets list each other.
// Returns an empty set when no candidate passes within the attempt budget
// (callers treat that as a skipped instance).  Mechanisms are named
// functions; callers needing numeric mechanisms replace them afterwards.
inline PolicySet random_policy_set(Rng& rng, const MixedGraph& g,
                                   int max_targets, double p_input,
                                   double p_deterministic) {
  const VertexSet observed = g.observed_vertices();
  const std::vector<std::string> pool(observed.begin(), observed.end());
  if (pool.empty()) return PolicySet{};
  for (int attempt = 0; attempt < 64; ++attempt) {
    const int want = 1 + rng.uniform_int(max_targets);
    std::vector<std::string> targets = pool;
    rng.shuffle(targets);
    targets.resize(
        static_cast<std::size_t>(std::min<int>(want, static_cast<int>(targets.size()))));

    PolicySet ps;
    for (const auto& a : targets) {
      const VertexSet forbidden = strict_exterior(g, {a});
      VertexSet inputs;
      for (const auto& z : pool) {
        if (z == a || contains(forbidden, z)) continue;
        if (rng.bernoulli(p_input)) inputs.insert(z);
      }
      const bool deterministic = rng.bernoulli(p_deterministic);
      ps.policies.push_back(Policy{
          a, inputs, PolicyMechanism::make_function("f_" + a, deterministic)});
    }
    // Mutual-dependence repair: targets that end up depending on each other
    // must list each other, which is only possible outside each other's
    // strict exterior.
    bool viable = true;
    for (int round = 0; round < max_targets + 1 && viable; ++round) {
      const auto dep = induced_dependence(ps, g);
      bool changed = false;
      for (auto& pi : ps.policies) {
        for (auto& pj : ps.policies) {
          if (pi.target >= pj.target) continue;
          if (!contains(dep.at(pi.target), pj.target) ||
              !contains(dep.at(pj.target), pi.target)) {
            continue;
          }
          if (contains(strict_exterior(g, {pi.target}), pj.target) ||
              contains(strict_exterior(g, {pj.target}), pi.target)) {
            viable = false;
            break;
          }
          if (!contains(pi.inputs, pj.target)) {
            pi.inputs.insert(pj.target);
            changed = true;
          }
          if (!contains(pj.inputs, pi.target)) {
            pj.inputs.insert(pi.target);
            changed = true;
          }
        }
        if (!viable) break;
      }
      if (!changed) break;
    }
    if (!viable) continue;
    if (satisfies_policy_definition(ps, g).ok) return ps;
  }
  return PolicySet{};
}

// Positive conditional table p(head | given): every column is a random
// point in the interior of the simplex.
inline Table random_conditional_table(
    Rng& rng, const std::pair<std::string, int>& head,
    const std::vector<std::pair<std::string, int>>& given) {
  std::vector<std::pair<std::string, int>> vars = given;
  vars.push_back(head);
  Table t(vars, 0.0);
  for (double& v : t.values()) v = 0.05 + rng.uniform();
  return t.condition_on_rest({head.first});
}

}  // namespace sgid
