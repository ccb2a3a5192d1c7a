#pragma once

// Identification of interventional and policy distributions, one algorithm
// per graph class:
//
//   g_formula_dag    DAGs,  node interventions
//   g_formula_cg     CGs,   node interventions
//   id_admg          ADMGs, node interventions
//   id_sg            SGs,   node interventions
//   policy_id_admg   ADMGs, policy interventions
//   policy_id_sg     SGs,   policy interventions
//
// Each algorithm either returns a closed-form functional of the observed
// distribution or reports the district whose kernel is not identified.  The
// functional is a product of three kinds of pieces: conditional densities read
// off the observed joint, district kernels obtained by fixing, and block
// equilibrium factors p*(B | pa(B)) for blocks whose mechanisms a policy
// rewires.  Constants and policy values enter through tail substitutions, so
// every returned expression is closed over the outcome set.

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgid/common.hpp"
#include "sgid/estimand.hpp"
#include "sgid/graph.hpp"
#include "sgid/intervention.hpp"

namespace sgid {

namespace detail {

inline void require_all_random(const MixedGraph& g, const char* who) {
  if (!g.fixed_vertices().empty()) {
    throw EstimandError(std::string(who) +
                        " expects a graph without fixed vertices");
  }
}

inline void require_vertices(const MixedGraph& g, const VertexSet& s,
                             const char* what) {
  for (const auto& v : s) {
    if (!g.has_vertex(v)) {
      throw EstimandError(std::string(what) + " mentions unknown vertex '" +
                          v + "'");
    }
  }
}

inline void require_disjoint(const VertexSet& y, const VertexSet& a) {
  for (const auto& v : a) {
    if (contains(y, v)) {
      throw EstimandError("outcome and intervention sets overlap at '" + v +
                          "'");
    }
  }
}

// Chain expansion of the joint law of h's random vertices along `order`,
// which must be a topological order of h extended from the graph h was
// derived from.  Each vertex contributes the conditional given its Markov
// pillow: the district of v in the subgraph induced on v's predecessors plus
// all context vertices, together with that district's parents.
inline ExprPtr chain_expansion(const MixedGraph& h,
                               const std::vector<std::string>& order) {
  const VertexSet random = h.random_vertices();
  const VertexSet fixed = h.fixed_vertices();
  std::vector<std::pair<ExprPtr, int>> factors;
  VertexSet seen;
  for (const auto& v : order) {
    if (!contains(random, v)) continue;
    seen.insert(v);
    MixedGraph prefix = induced_subgraph(h, set_union_of(seen, fixed));
    VertexSet dis = district_of(prefix, {v});
    VertexSet pillow = set_difference_of(
        set_union_of(dis, prefix.parents_of_set(dis)), VertexSet{v});
    factors.emplace_back(make_cpd(VertexSet{v}, pillow), 1);
  }
  return make_product(std::move(factors));
}

inline std::vector<std::string> restrict_order(
    const std::vector<std::string>& order, const VertexSet& keep) {
  std::vector<std::string> out;
  for (const auto& v : order) {
    if (contains(keep, v)) out.push_back(v);
  }
  return out;
}

// Substitutes the lowercase constant for every free conditioning occurrence
// of each intervened vertex.
inline ExprPtr bind_constants(ExprPtr e, const VertexSet& a) {
  for (const auto& v : a) {
    e = substitute(e, v, Substitution::constant(v));
  }
  return e;
}

// The district-part kernel of D, obtained by fixing everything else in the
// hosting CADMG.  Candidates are scanned latest-in-chain-order first: fixing
// is confluent, so the scan order cannot change reachability, but unwinding
// the chain from the back keeps each division a plain factor cancellation
// whenever the remaining kernel is still in chain form.  Returns the kernel,
// or nothing when no remaining vertex is fixable.
inline std::optional<ExprPtr> district_kernel(
    const MixedGraph& host, const ExprPtr& q,
    const std::vector<std::string>& chain_order, const VertexSet& district) {
  std::vector<std::string> candidates;
  for (const auto& v : chain_order) {
    if (!contains(district, v)) candidates.push_back(v);
  }
  std::reverse(candidates.begin(), candidates.end());
  ExprPtr kernel = q;
  MixedGraph current = host;
  while (!candidates.empty()) {
    bool advanced = false;
    for (auto it = candidates.begin(); it != candidates.end(); ++it) {
      if (!fixable(current, *it)) continue;
      auto next = fix_vertex(kernel, *it, current);
      kernel = std::move(next.first);
      current = std::move(next.second);
      candidates.erase(it);
      advanced = true;
      break;
    }
    if (!advanced) return std::nullopt;
  }
  return kernel;
}

// Fixing can leave context variables in a district kernel that the kernel
// provably does not depend on: a reachable kernel is a function of its
// district and the district's parents only, and every such parent is bound
// by the enclosing sum or by the intervention.  Averaging the leftovers
// against their observed marginal closes the expression without changing its
// value.
inline ExprPtr average_redundant_context(ExprPtr expr, const VertexSet& bound,
                                         VertexSet* binder) {
  VertexSet redundant = set_difference_of(free_variables(expr), bound);
  if (redundant.empty()) return expr;
  std::vector<std::pair<ExprPtr, int>> factors;
  factors.emplace_back(std::move(expr), 1);
  factors.emplace_back(make_cpd(redundant, {}), 1);
  *binder = set_union_of(*binder, redundant);
  return make_product(std::move(factors));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// DAGs: the g-formula.  p(V \ A)(a) = prod_{V in V\A} p(V | pa(V)) at A = a.

inline ExprPtr g_formula_dag(const MixedGraph& g, const VertexSet& a) {
  detail::require_all_random(g, "g_formula_dag");
  detail::require_vertices(g, a, "the intervention set");
  if (!classify(g).is_dag) {
    throw EstimandError("g_formula_dag expects a DAG");
  }
  std::vector<std::pair<ExprPtr, int>> factors;
  for (const auto& v : vertex_order(g)) {
    if (contains(a, v)) continue;
    factors.emplace_back(make_cpd(VertexSet{v}, g.parents(v)), 1);
  }
  return canonicalize(
      detail::bind_constants(make_product(std::move(factors)), a));
}

// ---------------------------------------------------------------------------
// CGs: one factor per block.  p(V \ A)(a) = prod_B p(B \ A | pa(B), B cap A)
// at A = a.  Blocks wholly inside A contribute nothing.

inline ExprPtr g_formula_cg(const MixedGraph& g, const VertexSet& a) {
  detail::require_all_random(g, "g_formula_cg");
  detail::require_vertices(g, a, "the intervention set");
  if (!classify(g).is_cg) {
    throw EstimandError("g_formula_cg expects a CG");
  }
  std::vector<std::pair<ExprPtr, int>> factors;
  for (const auto& block : blocks(g)) {
    VertexSet head = set_difference_of(block.members, a);
    if (head.empty()) continue;
    VertexSet tail = set_union_of(g.strict_parents_of_set(block.members),
                                  set_difference_of(block.members, head));
    factors.emplace_back(make_cpd(head, tail), 1);
  }
  return canonicalize(
      detail::bind_constants(make_product(std::move(factors)), a));
}

// ---------------------------------------------------------------------------
// ADMGs: one fixing problem per district of the subgraph on Y*, the ancestors
// of Y once A's outgoing edges are cut.  Identified iff every district is
// reachable in g.

inline IdResult id_admg(const MixedGraph& g, const VertexSet& y,
                        const VertexSet& a) {
  detail::require_all_random(g, "id_admg");
  detail::require_vertices(g, y, "the outcome set");
  detail::require_vertices(g, a, "the intervention set");
  detail::require_disjoint(y, a);
  if (y.empty()) throw EstimandError("id_admg expects a nonempty outcome set");
  if (!classify(g).is_admg) {
    throw EstimandError("id_admg expects an ADMG");
  }

  const VertexSet ystar =
      ancestors(induced_subgraph(g, set_difference_of(g.vertex_names(), a)), y);
  const MixedGraph marginal = induced_subgraph(g, ystar);
  const std::vector<std::string> order = vertex_order(g);
  const ExprPtr joint = detail::chain_expansion(g, order);

  std::vector<std::pair<ExprPtr, int>> factors;
  for (const auto& district : districts(marginal)) {
    auto kernel = detail::district_kernel(g, joint, order, district);
    if (!kernel.has_value()) return IdResult::failure(district, g);
    factors.emplace_back(std::move(*kernel), 1);
  }
  ExprPtr expr =
      detail::bind_constants(make_product(std::move(factors)), a);
  VertexSet binder = set_difference_of(ystar, y);
  expr = detail::average_redundant_context(std::move(expr), ystar, &binder);
  expr = make_sum(std::move(binder), std::move(expr));
  return IdResult::success(canonicalize(expr));
}

// ---------------------------------------------------------------------------
// SGs: Y* is the anterior of Y once A's outgoing edges are cut.  The district
// part of the subgraph on Y* is handled by fixing, exactly as in an ADMG; the
// block part contributes one clamped conditional per block of g that meets
// Y*.  A district of the Y* subgraph whose members sit in blocks of g is
// covered by the block side and exempt from fixing.

inline IdResult id_sg(const MixedGraph& g, const VertexSet& y,
                      const VertexSet& a) {
  detail::require_all_random(g, "id_sg");
  detail::require_vertices(g, y, "the outcome set");
  detail::require_vertices(g, a, "the intervention set");
  detail::require_disjoint(y, a);
  if (y.empty()) throw EstimandError("id_sg expects a nonempty outcome set");
  if (!classify(g).is_sg) {
    throw EstimandError("id_sg expects a segregated graph");
  }

  const VertexSet ystar =
      anterior(induced_subgraph(g, set_difference_of(g.vertex_names(), a)), y);
  const MixedGraph marginal = induced_subgraph(g, ystar);
  const VertexSet dstar = district_vertices(g);
  const MixedGraph hosting =
      conditional_graph(g, dstar, g.strict_parents_of_set(dstar));
  const std::vector<std::string> order =
      detail::restrict_order(vertex_order(g), dstar);
  const ExprPtr joint = detail::chain_expansion(hosting, order);

  std::vector<std::pair<ExprPtr, int>> factors;
  for (const auto& district : districts(marginal)) {
    if (!is_subset_of(district, dstar)) continue;  // covered by a block factor
    auto kernel = detail::district_kernel(hosting, joint, order, district);
    if (!kernel.has_value()) return IdResult::failure(district, hosting);
    factors.emplace_back(std::move(*kernel), 1);
  }
  for (const auto& block : nontrivial_blocks(g)) {
    VertexSet head = set_intersection_of(block, ystar);
    if (head.empty()) continue;
    VertexSet tail = set_union_of(g.strict_parents_of_set(head),
                                  set_intersection_of(block, a));
    factors.emplace_back(make_cpd(head, tail), 1);
  }
  ExprPtr expr =
      detail::bind_constants(make_product(std::move(factors)), a);
  VertexSet binder = set_difference_of(ystar, y);
  expr = detail::average_redundant_context(std::move(expr), ystar, &binder);
  expr = make_sum(std::move(binder), std::move(expr));
  return IdResult::success(canonicalize(expr));
}

namespace detail {

// Shared tail of the two policy algorithms, run after the graph-specific
// verdict and factor assembly.  Deterministic policies on district-part
// targets are substituted into conditioning positions; any target still
// referenced afterwards keeps its policy factor as a normalized sum weight.
// Block targets never reach this point, their mechanism lives inside an
// equilibrium factor.
inline ExprPtr close_policy_expression(
    std::vector<std::pair<ExprPtr, int>> factors, const PolicySet& ps,
    const VertexSet& district_part_targets, const VertexSet& ystar,
    const VertexSet& y) {
  ExprPtr product = make_product(std::move(factors));
  for (const auto& t : district_part_targets) {
    const Policy& policy = ps.policy_for(t);
    if (!policy.mechanism.deterministic) continue;
    Substitution sub = policy.mechanism.kind == MechanismKind::constant
                           ? Substitution::constant(t)
                           : Substitution::policy_value(policy);
    product = substitute(product, t, sub);
  }
  VertexSet still_free = free_variables(product);
  std::vector<std::pair<ExprPtr, int>> weighted{{std::move(product), 1}};
  for (const auto& t : district_part_targets) {
    if (contains(still_free, t)) {
      weighted.emplace_back(make_policy_factor(ps.policy_for(t)), 1);
    }
  }
  ExprPtr closed = make_product(std::move(weighted));
  VertexSet binder =
      set_difference_of(set_union_of(ystar, ps.targets()), y);
  // Policy inputs are never redundant: a weight genuinely depends on them,
  // so an unbound input must reach the leak check below instead.
  VertexSet bound = set_union_of(set_union_of(ystar, ps.targets()), y);
  for (const auto& policy : ps.policies) {
    bound = set_union_of(bound, policy.inputs);
  }
  closed = average_redundant_context(std::move(closed), bound, &binder);
  ExprPtr expr = make_sum(std::move(binder), std::move(closed));
  expr = canonicalize(expr);
  VertexSet leaked = set_difference_of(free_variables(expr), y);
  if (!leaked.empty()) {
    throw EstimandError("policy expression left '" + *leaked.begin() +
                        "' unbound");
  }
  return expr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ADMGs under policies.  The verdict is delegated to id_admg on Y* = the
// ancestors of Y in the intervened graph minus the targets: the policy
// distribution is identified iff p(Y*(a)) is, for any assignment a.  The
// functional fixes districts of the Y* subgraph in the original g and then
// replaces each target with its policy, either by substitution
// (deterministic) or by an explicit weight inside the sum (stochastic).

inline IdResult policy_id_admg(const MixedGraph& g, const VertexSet& y,
                               const PolicySet& ps) {
  detail::require_all_random(g, "policy_id_admg");
  detail::require_vertices(g, y, "the outcome set");
  if (y.empty()) {
    throw EstimandError("policy_id_admg expects a nonempty outcome set");
  }
  if (!classify(g).is_admg) {
    throw EstimandError("policy_id_admg expects an ADMG");
  }
  const VertexSet targets = ps.targets();
  detail::require_disjoint(y, targets);
  for (const auto& policy : ps.policies) {
    VertexSet downstream = descendants(g, {policy.target});
    VertexSet bad = set_intersection_of(policy.inputs, downstream);
    if (!bad.empty()) {
      throw EstimandError("input set of the policy on '" + policy.target +
                          "' violates precedence: '" + *bad.begin() +
                          "' is a descendant of the target");
    }
  }
  const MixedGraph gfa = intervene_graph(ps, g);
  if (!classify(gfa).is_admg) {
    throw EstimandError(
        "the policy set rewires the graph outside the ADMG class");
  }

  const VertexSet ystar =
      set_difference_of(ancestors(gfa, y), targets);
  const MixedGraph marginal = induced_subgraph(g, ystar);

  IdResult verdict = id_admg(g, ystar, targets);
  if (!verdict.identified) {
    return IdResult::failure(verdict.witness_district, verdict.witness_graph);
  }

  const std::vector<std::string> order = vertex_order(g);
  const ExprPtr joint = detail::chain_expansion(g, order);
  std::vector<std::pair<ExprPtr, int>> factors;
  for (const auto& district : districts(marginal)) {
    auto kernel = detail::district_kernel(g, joint, order, district);
    if (!kernel.has_value()) return IdResult::failure(district, g);
    factors.emplace_back(std::move(*kernel), 1);
  }
  return IdResult::success(detail::close_policy_expression(
      std::move(factors), ps, targets, ystar, y));
}

// ---------------------------------------------------------------------------
// SGs under policies.  Y* is the anterior of Y in the intervened graph minus
// the targets; the verdict is delegated to id_sg on Y*.  The functional keeps
// the observed data on the district side and the rewired mechanisms on the
// block side.  Districts of the Y* subgraph that live in g's district part
// are fixed out of the observed chain of that part, exactly as in id_sg, so
// target mechanisms are divided out rather than replaced.  A vertex that a
// policy released from its block keeps its observed full conditional given
// neighbors and parents, which equals its retained Gibbs mechanism.  Every
// nontrivial block of the intervened graph meeting the anterior contributes a
// block factor: p* when the block holds a target, the observed conditional
// otherwise.  Districts still inside such blocks are covered there and exempt
// from fixing.

inline IdResult policy_id_sg(const MixedGraph& g, const VertexSet& y,
                             const PolicySet& ps) {
  detail::require_all_random(g, "policy_id_sg");
  detail::require_vertices(g, y, "the outcome set");
  if (y.empty()) {
    throw EstimandError("policy_id_sg expects a nonempty outcome set");
  }
  if (!classify(g).is_sg) {
    throw EstimandError("policy_id_sg expects a segregated graph");
  }
  const VertexSet targets = ps.targets();
  detail::require_disjoint(y, targets);
  const MixedGraph gfa = intervene_graph(ps, g);

  const VertexSet anterior_y = anterior(gfa, y);
  const VertexSet ystar = set_difference_of(anterior_y, targets);

  IdResult verdict = id_sg(g, ystar, targets);
  if (!verdict.identified) {
    return IdResult::failure(verdict.witness_district, verdict.witness_graph);
  }

  const MixedGraph marginal = induced_subgraph(gfa, ystar);
  const VertexSet dstar = district_vertices(g);
  const VertexSet dstar_fa = district_vertices(gfa);
  const MixedGraph hosting =
      conditional_graph(g, dstar, g.strict_parents_of_set(dstar));
  const std::vector<std::string> order =
      detail::restrict_order(vertex_order(g), dstar);
  const ExprPtr joint = detail::chain_expansion(hosting, order);

  std::vector<std::pair<ExprPtr, int>> factors;
  for (const auto& district : districts(marginal)) {
    if (is_subset_of(district, dstar)) {
      auto kernel = detail::district_kernel(hosting, joint, order, district);
      if (!kernel.has_value()) return IdResult::failure(district, hosting);
      factors.emplace_back(std::move(*kernel), 1);
      continue;
    }
    if (is_subset_of(district, dstar_fa)) {
      // Released from a block of g by the policy on its neighbors; such a
      // district is always a singleton because the procedure adds no
      // bidirected edges.
      for (const auto& v : district) {
        factors.emplace_back(
            make_cpd(VertexSet{v}, set_union_of(g.neighbors(v), g.parents(v))),
            1);
      }
      continue;
    }
    // Still inside a block of the intervened graph: covered by its factor.
  }
  for (const auto& block : nontrivial_blocks(gfa)) {
    if (set_intersection_of(block, anterior_y).empty()) continue;
    VertexSet tail = gfa.strict_parents_of_set(block);
    VertexSet touched = set_intersection_of(block, targets);
    if (touched.empty()) {
      factors.emplace_back(make_cpd(block, tail), 1);
      continue;
    }
    std::vector<PStarMember> members;
    for (const auto& v : block) {
      PStarMember member;
      member.name = v;
      member.is_target = contains(targets, v);
      if (member.is_target) {
        member.policy = ps.policy_for(v);
      } else {
        member.observed_args = set_difference_of(
            set_union_of(g.neighbors(v), g.parents(v)), VertexSet{v});
      }
      members.push_back(std::move(member));
    }
    factors.emplace_back(make_pstar(std::move(members), detail::to_entries(tail)),
                         1);
  }
  return IdResult::success(detail::close_policy_expression(
      std::move(factors), ps, set_intersection_of(targets, dstar_fa), ystar,
      y));
}

}  // namespace sgid
