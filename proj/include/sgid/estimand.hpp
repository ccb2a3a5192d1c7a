#pragma once

// Symbolic estimands: an immutable expression tree over conditional-density
// atoms, equilibrium factors, policy densities, products with signed
// exponents, kernel sums, and explicit fixing nodes.  The tree supports a
// deterministic canonical form (sorted commutative children, cancelled
// reciprocal factors, collapsed vacuous sums), deterministic text and LaTeX
// rendering, and the kernel algebra (marginalize, condition, fix) used by
// the identification algorithms.
//
// Naming conventions:
//   - a display name is a graph vertex name with zero or more trailing
//     primes; stripping the primes recovers the underlying vertex.  Primes
//     mark bound dummies introduced when a fixing divisor sums over a
//     variable that stays in scope (the front-door mixture's A').
//   - substituted tail entries render as the substitution (a constant
//     symbol such as "a2", or a policy application "f[A](Z1,Z2)") and are
//     not free variables of the atom; a policy application's arguments are.
//
// Canonical grammar (text):
//   expr    := sum | product | factor
//   sum     := "Σ_{" names "} " expr            (binds to the end of scope)
//   product := factor {" " factor} {" / " factor}
//   factor  := cpd | pstar | policy | fix | "(" sum ")" | "1"
//   cpd     := "p(" entries ["|" entries] ")"
//   pstar   := "p*(" entries ["|" entries] ")"
//   policy  := "f[" name "](" entries ["|" entries] ")"
//   fix     := "φ_" name "(" expr ")"
// Products sort factors by rendered text, positive exponents first; a sum
// appearing as a non-final positive factor is parenthesized.  Entry lists
// are comma-joined, sorted by underlying variable (policy applications by
// rendered text, which places them last).

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgid/common.hpp"
#include "sgid/graph.hpp"
#include "sgid/intervention.hpp"

namespace sgid {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind { cpd, pstar, policy_factor, product, sum_over, fix };

enum class RenderFormat { text, latex };

// Strips the trailing primes from a display name, recovering the vertex.
inline std::string base_name(const std::string& display) {
  std::size_t end = display.size();
  while (end > 0 && display[end - 1] == '\'') --end;
  return display.substr(0, end);
}

// A substituted value for a conditioning entry: either a constant symbol
// bound at evaluation time, or a deterministic policy applied to its inputs.
struct Substitution {
  enum class Kind { constant, policy };
  Kind kind = Kind::constant;
  std::string var;     // the substituted vertex
  std::string symbol;  // constant: evaluation-time binding key
  Policy policy;       // policy: must be deterministic

  static Substitution constant(const std::string& var) {
    Substitution s;
    s.kind = Kind::constant;
    s.var = var;
    s.symbol = lower_symbol(var);
    return s;
  }

  static Substitution policy_value(const Policy& p) {
    if (!p.mechanism.deterministic) {
      throw EstimandError("cannot substitute stochastic policy for '" +
                          p.target + "'");
    }
    Substitution s;
    s.kind = Kind::policy;
    s.var = p.target;
    s.policy = p;
    return s;
  }

  static std::string lower_symbol(const std::string& var) {
    std::string out = var;
    for (char& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }
};

// One entry of a head or tail list.  Unsubstituted entries are free
// variables; substituted entries contribute the substitution's arguments.
struct Entry {
  std::string var;
  std::optional<Substitution> sub;

  Entry() = default;
  explicit Entry(std::string name) : var(std::move(name)) {}
  Entry(std::string name, Substitution s)
      : var(std::move(name)), sub(std::move(s)) {}
};

// Per-member payload of an equilibrium factor: targets carry their policy,
// other members carry the argument set of their observed full conditional.
struct PStarMember {
  std::string name;
  bool is_target = false;
  Policy policy;            // is_target only
  VertexSet observed_args;  // !is_target: neighbors and parents in G
};

struct Expr {
  ExprKind kind = ExprKind::product;

  // cpd / pstar / policy_factor
  std::vector<Entry> head;
  std::vector<Entry> tail;

  // pstar
  std::vector<PStarMember> members;

  // policy_factor
  Policy policy;

  // product
  std::vector<std::pair<ExprPtr, int>> factors;

  // sum_over
  VertexSet sum_vars;

  // sum_over / fix
  ExprPtr child;

  // fix
  std::string fixed_vertex;
  std::shared_ptr<const MixedGraph> fix_graph_snapshot;
};

namespace detail {

inline std::string render_entry(const Entry& e, RenderFormat fmt);

// Entry lists sort by the underlying variable, so a constant-substituted
// entry keeps its variable's position; policy applications sort by their
// rendered text, which places them after plain names.
inline std::string entry_sort_key(const Entry& e) {
  if (e.sub.has_value() && e.sub->kind == Substitution::Kind::policy) {
    return render_entry(e, RenderFormat::text);
  }
  return e.var;
}

inline std::vector<Entry> sorted_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return entry_sort_key(a) < entry_sort_key(b);
  });
  return entries;
}

inline std::vector<Entry> to_entries(const VertexSet& names) {
  std::vector<Entry> out;
  for (const auto& n : names) out.emplace_back(n);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factories.  All atoms sort their entry lists on construction, so any two
// structurally equal atoms render identically.

inline ExprPtr make_cpd(std::vector<Entry> head, std::vector<Entry> tail) {
  if (head.empty()) throw EstimandError("conditional density needs a head");
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::cpd;
  e->head = detail::sorted_entries(std::move(head));
  e->tail = detail::sorted_entries(std::move(tail));
  return e;
}

inline ExprPtr make_cpd(const VertexSet& head, const VertexSet& tail) {
  return make_cpd(detail::to_entries(head), detail::to_entries(tail));
}

// The observed joint p(V) is the conditional density with an empty tail.
inline ExprPtr observed_joint(const VertexSet& vars) {
  return make_cpd(vars, VertexSet{});
}

inline ExprPtr make_pstar(std::vector<PStarMember> members,
                          std::vector<Entry> tail) {
  if (members.empty()) throw EstimandError("equilibrium factor needs a block");
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::pstar;
  std::sort(members.begin(), members.end(),
            [](const PStarMember& a, const PStarMember& b) {
              return a.name < b.name;
            });
  for (const auto& m : members) e->head.emplace_back(m.name);
  e->members = std::move(members);
  e->tail = detail::sorted_entries(std::move(tail));
  return e;
}

inline ExprPtr make_policy_factor(const Policy& p) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::policy_factor;
  e->policy = p;
  e->head.emplace_back(p.target);
  e->tail = detail::sorted_entries(detail::to_entries(p.inputs));
  return e;
}

inline ExprPtr make_product(std::vector<std::pair<ExprPtr, int>> factors) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::product;
  e->factors = std::move(factors);
  return e;
}

inline ExprPtr make_one() { return make_product({}); }

inline ExprPtr make_sum(const VertexSet& vars, ExprPtr child) {
  if (vars.empty()) return child;
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::sum_over;
  e->sum_vars = vars;
  e->child = std::move(child);
  return e;
}

inline ExprPtr make_fix(ExprPtr child, const std::string& vertex,
                        const MixedGraph& graph) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::fix;
  e->child = std::move(child);
  e->fixed_vertex = vertex;
  e->fix_graph_snapshot = std::make_shared<const MixedGraph>(graph);
  return e;
}

// ---------------------------------------------------------------------------
// Free variables.  A sum binds its variables; a fix node keeps its vertex
// free (the result kernel still conditions on it).

inline void collect_free_variables(const Expr& e, VertexSet& out);

namespace detail {

inline void collect_entry_vars(const std::vector<Entry>& entries,
                               VertexSet& out) {
  for (const auto& entry : entries) {
    if (!entry.sub.has_value()) {
      out.insert(entry.var);
      continue;
    }
    if (entry.sub->kind == Substitution::Kind::policy) {
      for (const auto& arg : entry.sub->policy.inputs) out.insert(arg);
    }
  }
}

}  // namespace detail

inline void collect_free_variables(const Expr& e, VertexSet& out) {
  switch (e.kind) {
    case ExprKind::cpd:
    case ExprKind::pstar:
    case ExprKind::policy_factor:
      detail::collect_entry_vars(e.head, out);
      detail::collect_entry_vars(e.tail, out);
      return;
    case ExprKind::product:
      for (const auto& [f, exp] : e.factors) {
        (void)exp;
        collect_free_variables(*f, out);
      }
      return;
    case ExprKind::sum_over: {
      VertexSet inner;
      collect_free_variables(*e.child, inner);
      for (const auto& v : inner) {
        if (!contains(e.sum_vars, v)) out.insert(v);
      }
      return;
    }
    case ExprKind::fix:
      collect_free_variables(*e.child, out);
      out.insert(e.fixed_vertex);
      return;
  }
}

inline VertexSet free_variables(const ExprPtr& e) {
  VertexSet out;
  collect_free_variables(*e, out);
  return out;
}

namespace detail {

// Collects every variable name mentioned anywhere in the tree, free or
// bound, including substitution arguments and equilibrium block members.
// Used to pick collision-free primed dummies.
inline void collect_all_names(const Expr& e, VertexSet& out) {
  auto take_entries = [&out](const std::vector<Entry>& entries) {
    for (const auto& entry : entries) {
      out.insert(entry.var);
      if (entry.sub.has_value() &&
          entry.sub->kind == Substitution::Kind::policy) {
        for (const auto& arg : entry.sub->policy.inputs) out.insert(arg);
      }
    }
  };
  take_entries(e.head);
  take_entries(e.tail);
  for (const auto& m : e.members) {
    out.insert(m.name);
    for (const auto& arg : m.observed_args) out.insert(arg);
  }
  for (const auto& [f, exp] : e.factors) {
    (void)exp;
    collect_all_names(*f, out);
  }
  for (const auto& v : e.sum_vars) out.insert(v);
  if (e.child) collect_all_names(*e.child, out);
  if (!e.fixed_vertex.empty()) out.insert(e.fixed_vertex);
}

// True when some sum inside the tree binds var.
inline bool binds_var(const Expr& e, const std::string& var) {
  if (e.kind == ExprKind::sum_over && contains(e.sum_vars, var)) return true;
  for (const auto& [f, exp] : e.factors) {
    (void)exp;
    if (binds_var(*f, var)) return true;
  }
  if (e.child && binds_var(*e.child, var)) return true;
  return false;
}

// The raw vertex names (no trailing prime) bound by sums inside the tree.
inline void collect_raw_binders(const Expr& e, VertexSet& out) {
  if (e.kind == ExprKind::sum_over) {
    for (const auto& v : e.sum_vars) {
      if (v == base_name(v)) out.insert(v);
    }
  }
  for (const auto& [f, exp] : e.factors) {
    (void)exp;
    collect_raw_binders(*f, out);
  }
  if (e.child) collect_raw_binders(*e.child, out);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rendering.

inline std::string render(const ExprPtr& e, RenderFormat fmt);

namespace detail {

inline std::string latex_name(const std::string& name) {
  // Vertex names like "A_l" already read as subscripts in math mode; only
  // primes need mapping so they attach as superscripts.
  std::string out;
  for (char c : name) {
    if (c == '\'') {
      out += "'";
    } else {
      out += c;
    }
  }
  return out;
}

inline std::string render_name(const std::string& name, RenderFormat fmt) {
  return fmt == RenderFormat::text ? name : latex_name(name);
}

inline std::string render_entry(const Entry& e, RenderFormat fmt) {
  if (!e.sub.has_value()) return render_name(e.var, fmt);
  const Substitution& s = *e.sub;
  if (s.kind == Substitution::Kind::constant) {
    return render_name(s.symbol, fmt);
  }
  std::string args;
  for (const auto& arg : s.policy.inputs) {
    if (!args.empty()) args += fmt == RenderFormat::text ? "," : ", ";
    args += render_name(arg, fmt);
  }
  if (fmt == RenderFormat::text) {
    return "f[" + s.policy.target + "](" + args + ")";
  }
  return "f_{" + latex_name(s.policy.target) + "}(" + args + ")";
}

inline std::string render_entries(const std::vector<Entry>& entries,
                                  RenderFormat fmt) {
  std::string out;
  for (const auto& e : entries) {
    if (!out.empty()) out += fmt == RenderFormat::text ? "," : ", ";
    out += render_entry(e, fmt);
  }
  return out;
}

inline std::string render_atom(const std::string& symbol, const Expr& e,
                               RenderFormat fmt) {
  const char* mid = fmt == RenderFormat::text ? "|" : " \\mid ";
  std::string out = symbol + "(" + render_entries(e.head, fmt);
  if (!e.tail.empty()) out += mid + render_entries(e.tail, fmt);
  out += ")";
  return out;
}

inline std::string render_names(const VertexSet& names, RenderFormat fmt) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += fmt == RenderFormat::text ? "," : ", ";
    out += render_name(n, fmt);
  }
  return out;
}

}  // namespace detail

inline std::string render(const ExprPtr& e, RenderFormat fmt) {
  switch (e->kind) {
    case ExprKind::cpd:
      return detail::render_atom("p", *e, fmt);
    case ExprKind::pstar:
      return detail::render_atom(fmt == RenderFormat::text ? "p*" : "p^{\\star}",
                                 *e, fmt);
    case ExprKind::policy_factor: {
      std::string symbol = fmt == RenderFormat::text
                               ? "f[" + e->policy.target + "]"
                               : "f_{" + detail::latex_name(e->policy.target) +
                                     "}";
      return detail::render_atom(symbol, *e, fmt);
    }
    case ExprKind::product: {
      if (e->factors.empty()) return "1";
      struct Part {
        std::string text;
        int exp;
        ExprKind kind;
      };
      std::vector<Part> parts;
      for (const auto& [f, exp] : e->factors) {
        parts.push_back({render(f, fmt), exp, f->kind});
      }
      // Canonical products are pre-sorted; render re-sorts so that even
      // hand-built trees print deterministically.
      std::stable_sort(parts.begin(), parts.end(),
                       [](const Part& a, const Part& b) {
                         if ((a.exp > 0) != (b.exp > 0)) return a.exp > 0;
                         return a.text < b.text;
                       });
      std::size_t last_positive = 0;
      bool any_negative = false;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].exp > 0) last_positive = i;
        if (parts[i].exp < 0) any_negative = true;
      }
      std::string out;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const Part& part = parts[i];
        int count = part.exp > 0 ? part.exp : -part.exp;
        for (int k = 0; k < count; ++k) {
          std::string piece = part.text;
          // A sum binds to the end of scope, so it needs parentheses unless
          // it is the last rendered piece; a nested multi-factor product
          // (possible only in hand-built trees) always needs them.
          bool needs_parens =
              (part.kind == ExprKind::sum_over &&
               (part.exp < 0 || any_negative || i != last_positive ||
                k + 1 != count)) ||
              (part.kind == ExprKind::product && part.text != "1");
          if (needs_parens) piece = "(" + piece + ")";
          if (part.exp > 0) {
            out += out.empty() ? piece : " " + piece;
          } else {
            out += (out.empty() ? "1 / " : " / ") + piece;
          }
        }
      }
      return out;
    }
    case ExprKind::sum_over: {
      std::string head = fmt == RenderFormat::text ? "\xce\xa3_{" : "\\sum_{";
      return head + detail::render_names(e->sum_vars, fmt) + "} " +
             render(e->child, fmt);
    }
    case ExprKind::fix: {
      std::string head = fmt == RenderFormat::text
                             ? "\xcf\x86_" + e->fixed_vertex
                             : "\\phi_{" +
                                   detail::latex_name(e->fixed_vertex) + "}";
      return head + "(" + render(e->child, fmt) + ")";
    }
  }
  throw EstimandError("unreachable expression kind");
}

inline std::string render_text(const ExprPtr& e) {
  return render(e, RenderFormat::text);
}

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  return render_text(a) == render_text(b);
}

// ---------------------------------------------------------------------------
// Canonicalization.  Rules applied to a fixpoint:
//   - flatten nested products, distributing exponents;
//   - cancel factors that appear with opposite exponents;
//   - merge directly nested sums and drop sum variables that are not free
//     in the body; a sum with no variables left unwraps;
//   - sort product factors by rendered text.
// Head marginalization (absorbing Σ_x into an atom with x in its head) is
// deliberately not part of the canonical form; it is the job of kernel_marginalize(),
// which the fixing engine calls for its divisors.

inline ExprPtr canonicalize(const ExprPtr& e);

namespace detail {

inline void flatten_into(const ExprPtr& e, int exponent,
                         std::vector<std::pair<ExprPtr, int>>& out) {
  if (e->kind == ExprKind::product) {
    for (const auto& [f, exp] : e->factors) {
      flatten_into(f, exponent * exp, out);
    }
    return;
  }
  out.emplace_back(e, exponent);
}

inline ExprPtr canonicalize_product(const Expr& e) {
  std::vector<std::pair<ExprPtr, int>> flat;
  for (const auto& [f, exp] : e.factors) {
    flatten_into(canonicalize(f), exp, flat);
  }
  // Merge by rendered text so reciprocal pairs cancel exactly.
  std::map<std::string, std::pair<ExprPtr, int>> merged;
  for (const auto& [f, exp] : flat) {
    auto key = render_text(f);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, std::make_pair(f, exp));
    } else {
      it->second.second += exp;
    }
  }
  std::vector<std::pair<ExprPtr, int>> kept;
  for (const auto& [key, entry] : merged) {
    (void)key;
    if (entry.second != 0) kept.push_back(entry);
  }
  if (kept.size() == 1 && kept[0].second == 1) return kept[0].first;
  return make_product(std::move(kept));
}

inline ExprPtr canonicalize_sum(const Expr& e) {
  ExprPtr child = canonicalize(e.child);
  VertexSet vars = e.sum_vars;
  while (child->kind == ExprKind::sum_over) {
    // An outer variable shadowed by the inner sum binds nothing; it is
    // dropped before the merge (the vacuous-sum rule, which by convention
    // ignores the cardinality multiplier).
    vars = set_difference_of(vars, child->sum_vars);
    vars = set_union_of(vars, child->sum_vars);
    child = child->child;
  }
  VertexSet free;
  collect_free_variables(*child, free);
  VertexSet kept = set_intersection_of(vars, free);
  if (kept.empty()) return child;
  return make_sum(kept, child);
}

}  // namespace detail

inline ExprPtr canonicalize(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::cpd:
    case ExprKind::pstar:
    case ExprKind::policy_factor:
      return e;
    case ExprKind::product:
      return detail::canonicalize_product(*e);
    case ExprKind::sum_over:
      return detail::canonicalize_sum(*e);
    case ExprKind::fix: {
      ExprPtr child = canonicalize(e->child);
      auto out = std::make_shared<Expr>(*e);
      out->child = child;
      return out;
    }
  }
  throw EstimandError("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Substitution of free occurrences of a vertex, in head and conditioning
// positions alike.  A substituted head entry evaluates the density at that
// point; fixing a vertex whose divisor does not cancel leaves exactly such
// heads behind, inside the ratio's marginal sums.

inline ExprPtr substitute(const ExprPtr& e, const std::string& var,
                          const Substitution& sub);

namespace detail {

inline std::vector<Entry> substitute_entries(const std::vector<Entry>& entries,
                                             const std::string& var,
                                             const Substitution& sub,
                                             bool* changed) {
  std::vector<Entry> out;
  out.reserve(entries.size());
  for (const auto& entry : entries) {
    if (!entry.sub.has_value() && entry.var == var) {
      out.emplace_back(entry.var, sub);
      *changed = true;
    } else {
      out.push_back(entry);
    }
  }
  return out;
}

}  // namespace detail

inline ExprPtr substitute(const ExprPtr& e, const std::string& var,
                          const Substitution& sub) {
  switch (e->kind) {
    case ExprKind::cpd:
    case ExprKind::pstar:
    case ExprKind::policy_factor: {
      bool changed = false;
      auto head = detail::substitute_entries(e->head, var, sub, &changed);
      auto tail = detail::substitute_entries(e->tail, var, sub, &changed);
      if (!changed) return e;
      auto out = std::make_shared<Expr>(*e);
      out->head = detail::sorted_entries(std::move(head));
      out->tail = detail::sorted_entries(std::move(tail));
      return out;
    }
    case ExprKind::product: {
      std::vector<std::pair<ExprPtr, int>> factors;
      bool changed = false;
      for (const auto& [f, exp] : e->factors) {
        ExprPtr nf = substitute(f, var, sub);
        changed = changed || nf != f;
        factors.emplace_back(nf, exp);
      }
      if (!changed) return e;
      return make_product(std::move(factors));
    }
    case ExprKind::sum_over: {
      if (contains(e->sum_vars, var)) return e;  // shadowed, nothing free
      ExprPtr child = substitute(e->child, var, sub);
      if (child == e->child) return e;
      return make_sum(e->sum_vars, child);
    }
    case ExprKind::fix: {
      ExprPtr child = substitute(e->child, var, sub);
      if (child == e->child) return e;
      auto out = std::make_shared<Expr>(*e);
      out->child = child;
      return out;
    }
  }
  throw EstimandError("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Kernel algebra.  marginal pushes a sum into a product, absorbing each
// variable that occurs free in exactly one atom and only in that atom's
// head (kernel heads integrate to one); remaining variables stay summed.

namespace detail {

// Counts the factors of a flattened product in which var occurs free, and
// reports whether the only occurrence is the head of a single positive atom.
struct Occurrence {
  int factor_count = 0;
  std::size_t atom_index = 0;
  bool head_only = false;
};

inline Occurrence occurrence_of(const std::vector<std::pair<ExprPtr, int>>&
                                    factors,
                                const std::string& var) {
  Occurrence occ;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& [f, exp] = factors[i];
    VertexSet free;
    collect_free_variables(*f, free);
    if (!contains(free, var)) continue;
    occ.factor_count += 1;
    occ.atom_index = i;
    if (occ.factor_count > 1) {
      occ.head_only = false;
      continue;
    }
    bool is_atom = f->kind == ExprKind::cpd || f->kind == ExprKind::pstar ||
                   f->kind == ExprKind::policy_factor;
    if (!is_atom || exp != 1) {
      occ.head_only = false;
      continue;
    }
    bool in_head = false;
    for (const auto& entry : f->head) {
      if (!entry.sub.has_value() && entry.var == var) in_head = true;
    }
    VertexSet tail_vars;
    collect_entry_vars(f->tail, tail_vars);
    occ.head_only = in_head && !contains(tail_vars, var);
  }
  return occ;
}

// Removes var from the atom's head; dropping the last head entry of a
// density leaves the constant one.  An equilibrium factor keeps its member
// list: the head names the margin, the members name the block mechanism.
inline ExprPtr drop_head_var(const ExprPtr& atom, const std::string& var) {
  std::vector<Entry> head;
  for (const auto& entry : atom->head) {
    if (!entry.sub.has_value() && entry.var == var) continue;
    head.push_back(entry);
  }
  if (head.empty()) return make_one();
  switch (atom->kind) {
    case ExprKind::cpd:
    case ExprKind::pstar: {
      auto out = std::make_shared<Expr>(*atom);
      out->head = std::move(head);
      return out;
    }
    case ExprKind::policy_factor:
      // A policy density's head is its single target; removing it leaves 1,
      // which the head.empty() branch above already returned.
      throw EstimandError("policy factor head cannot be partially dropped");
    default:
      throw EstimandError("drop_head_var applies to atoms only");
  }
}

}  // namespace detail

// Marginalizes a kernel over vars.  Three reduction rules run to a
// fixpoint on the root sum:
//   - absorb: a variable free only in the head of one positive atom drops
//     out of that head (kernel heads integrate to one);
//   - push: a variable free only inside one positive sum factor moves into
//     that factor, where the merged binder list lets absorption continue;
//   - split: once nothing absorbs or pushes, factors free of every stuck
//     variable move outside the sum.
// Variables that cannot be absorbed stay summed.
inline ExprPtr kernel_marginalize(const ExprPtr& e, const VertexSet& vars) {
  ExprPtr current = canonicalize(make_sum(vars, e));
  while (current->kind == ExprKind::sum_over) {
    std::vector<std::pair<ExprPtr, int>> factors;
    if (current->child->kind == ExprKind::product) {
      factors = current->child->factors;
    } else {
      factors.emplace_back(current->child, 1);
    }
    bool progressed = false;
    for (const auto& var : current->sum_vars) {
      auto occ = detail::occurrence_of(factors, var);
      if (occ.factor_count != 1) continue;
      auto& holder = factors[occ.atom_index];
      if (occ.head_only) {
        holder.first = detail::drop_head_var(holder.first, var);
      } else if (holder.first->kind == ExprKind::sum_over &&
                 holder.second == 1) {
        holder.first = kernel_marginalize(holder.first, VertexSet{var});
      } else {
        continue;
      }
      VertexSet rest = current->sum_vars;
      rest.erase(var);
      current = canonicalize(make_sum(rest, make_product(factors)));
      progressed = true;
      break;
    }
    if (progressed) continue;
    std::vector<std::pair<ExprPtr, int>> outside;
    std::vector<std::pair<ExprPtr, int>> inside;
    for (const auto& factor : factors) {
      VertexSet free;
      collect_free_variables(*factor.first, free);
      if (intersects(free, current->sum_vars)) {
        inside.push_back(factor);
      } else {
        outside.push_back(factor);
      }
    }
    if (!outside.empty() && !inside.empty()) {
      outside.emplace_back(
          make_sum(current->sum_vars, make_product(std::move(inside))), 1);
      current = canonicalize(make_product(std::move(outside)));
    }
    break;
  }
  return canonicalize(current);
}

// Kernel conditioning q(rest | given, W) = q / q(given | W).  For a single
// density atom whose head contains the given set, the result is the atom
// with those entries moved into the tail; otherwise the explicit ratio.
inline ExprPtr kernel_condition(const ExprPtr& e, const VertexSet& given) {
  if (given.empty()) return canonicalize(e);
  if (e->kind == ExprKind::cpd) {
    VertexSet head_vars;
    detail::collect_entry_vars(e->head, head_vars);
    if (is_subset_of(given, head_vars)) {
      std::vector<Entry> head;
      std::vector<Entry> tail = e->tail;
      for (const auto& entry : e->head) {
        if (!entry.sub.has_value() && contains(given, entry.var)) {
          tail.push_back(entry);
        } else {
          head.push_back(entry);
        }
      }
      if (head.empty()) return make_one();
      return make_cpd(std::move(head), std::move(tail));
    }
  }
  VertexSet free = free_variables(e);
  VertexSet drop = set_difference_of(free, given);
  ExprPtr denominator = kernel_marginalize(e, drop);
  return canonicalize(make_product({{e, 1}, {denominator, -1}}));
}

// ---------------------------------------------------------------------------
// Fixing.

// A vertex is fixable when its reflexive descendants within its district are
// itself alone; both relations walk only the current random vertices.  Block
// vertices are never fixable: the fixing operator is defined on conditional
// graphs whose random part carries no undirected edges.
inline bool fixable(const MixedGraph& g, const std::string& v) {
  if (!g.neighbors(v).empty()) return false;
  VertexSet seed{v};
  VertexSet overlap = set_intersection_of(descendants(g, seed),
                                          district_of(g, seed));
  return overlap == seed;
}

// Graph half of the fixing operator: v joins the context, every edge into v
// is removed, edges out of v survive.
inline MixedGraph fix_graph(const MixedGraph& g, const std::string& v) {
  if (!contains(g.random_vertices(), v)) {
    throw EstimandError("cannot fix non-random vertex '" + v + "'");
  }
  MixedGraph out = g;
  std::vector<Edge> to_remove;
  for (const auto& e : out.edges()) {
    if (e.kind == EdgeKind::directed && e.head == v) to_remove.push_back(e);
    if (e.kind == EdgeKind::bidirected && (e.head == v || e.tail == v)) {
      to_remove.push_back(e);
    }
    if (e.kind == EdgeKind::undirected && (e.head == v || e.tail == v)) {
      throw EstimandError("cannot fix '" + v + "': it has undirected edges");
    }
  }
  for (const auto& e : to_remove) out.remove_edge(e.tail, e.head, e.kind);
  VertexSet fixed = out.fixed_vertices();
  fixed.insert(v);
  out.set_fixed(fixed);
  return out;
}

namespace detail {

// Renames the bound variable of the divisor's denominator to a fresh primed
// dummy so it cannot collide with the same vertex appearing free in the
// result kernel (the fixed vertex stays in scope as context).
inline ExprPtr rename_bound(const ExprPtr& e, const std::string& from,
                            const std::string& to);

inline std::vector<Entry> rename_entries(const std::vector<Entry>& entries,
                                         const std::string& from,
                                         const std::string& to,
                                         bool* changed) {
  std::vector<Entry> out;
  for (const auto& entry : entries) {
    if (!entry.sub.has_value() && entry.var == from) {
      out.emplace_back(to);
      *changed = true;
    } else {
      out.push_back(entry);
    }
  }
  return out;
}

inline ExprPtr rename_bound(const ExprPtr& e, const std::string& from,
                            const std::string& to) {
  switch (e->kind) {
    case ExprKind::cpd:
    case ExprKind::pstar:
    case ExprKind::policy_factor: {
      bool changed = false;
      auto head = rename_entries(e->head, from, to, &changed);
      auto tail = rename_entries(e->tail, from, to, &changed);
      if (!changed) return e;
      // Members of an equilibrium factor keep their graph names: a renamed
      // head entry still resolves to its member through base_name.
      auto out = std::make_shared<Expr>(*e);
      out->head = sorted_entries(std::move(head));
      out->tail = sorted_entries(std::move(tail));
      return out;
    }
    case ExprKind::product: {
      std::vector<std::pair<ExprPtr, int>> factors;
      for (const auto& [f, exp] : e->factors) {
        factors.emplace_back(rename_bound(f, from, to), exp);
      }
      return make_product(std::move(factors));
    }
    case ExprKind::sum_over: {
      VertexSet vars;
      bool bound_here = false;
      for (const auto& v : e->sum_vars) {
        if (v == from) {
          vars.insert(to);
          bound_here = true;
        } else {
          vars.insert(v);
        }
      }
      (void)bound_here;
      return make_sum(vars, rename_bound(e->child, from, to));
    }
    case ExprKind::fix: {
      auto out = std::make_shared<Expr>(*e);
      out->child = rename_bound(e->child, from, to);
      return out;
    }
  }
  throw EstimandError("unreachable expression kind");
}

inline std::string fresh_prime(const std::string& base,
                               const VertexSet& used) {
  std::string candidate = base + "'";
  while (contains(used, candidate)) candidate += "'";
  return candidate;
}

}  // namespace detail

// Fixing operator on kernels: divides q by q(v | pa(dis(v)) ∪ dis(v), W) and
// moves v into the context.  The divisor's marginals absorb via kernel_marginalize(),
// so factored kernels telescope.  Sums that survive inside the marginals
// bind raw vertex names that stay in scope in the result; every such binder
// is renamed to a fresh primed dummy, identically in both marginals so that
// shared composites still cancel.
inline std::pair<ExprPtr, MixedGraph> fix_vertex(const ExprPtr& q,
                                                 const std::string& v,
                                                 const MixedGraph& g) {
  if (!contains(g.random_vertices(), v)) {
    throw EstimandError("cannot fix non-random vertex '" + v + "'");
  }
  if (!fixable(g, v)) {
    throw EstimandError("vertex '" + v + "' is not fixable: its district "
                        "contains a proper descendant");
  }
  VertexSet seed{v};
  VertexSet dis = district_of(g, seed);
  VertexSet blanket =
      set_difference_of(set_union_of(dis, g.parents_of_set(dis)), seed);
  VertexSet blanket_random = set_intersection_of(blanket, g.random_vertices());
  VertexSet randoms = g.random_vertices();

  ExprPtr numerator = kernel_marginalize(
      q, set_difference_of(randoms, set_union_of(blanket_random, seed)));
  ExprPtr denominator =
      kernel_marginalize(q, set_difference_of(randoms, blanket_random));

  // Binders inherited from earlier steps already carry primes, so the raw
  // binders below are exactly the sums created by the two marginals above.
  VertexSet raw;
  detail::collect_raw_binders(*numerator, raw);
  detail::collect_raw_binders(*denominator, raw);
  if (!raw.empty()) {
    VertexSet used;
    detail::collect_all_names(*q, used);
    detail::collect_all_names(*numerator, used);
    detail::collect_all_names(*denominator, used);
    for (const auto& name : raw) {
      std::string fresh = detail::fresh_prime(name, used);
      used.insert(fresh);
      // A root-bound name is never free in the same marginal, but it can be
      // free in the other one (v is free in the numerator and bound in the
      // denominator), so each marginal is renamed only where it binds.
      if (detail::binds_var(*numerator, name)) {
        numerator = detail::rename_bound(numerator, name, fresh);
      }
      if (detail::binds_var(*denominator, name)) {
        denominator = detail::rename_bound(denominator, name, fresh);
      }
    }
  }

  ExprPtr result = canonicalize(
      make_product({{q, 1}, {denominator, 1}, {numerator, -1}}));
  return {result, fix_graph(g, v)};
}

// Greedy certificate that the complement of s can be fixed: at each step the
// lexicographically first fixable vertex outside s is fixed.  Greedy search
// is complete because fixing-order choices never block one another.
inline std::optional<std::vector<std::string>> reachable(const MixedGraph& g,
                                                         const VertexSet& s) {
  if (!is_subset_of(s, g.random_vertices())) {
    throw EstimandError("reachable target must be a set of random vertices");
  }
  MixedGraph current = g;
  std::vector<std::string> order;
  VertexSet remaining = set_difference_of(g.random_vertices(), s);
  while (!remaining.empty()) {
    bool advanced = false;
    for (const auto& v : remaining) {
      if (fixable(current, v)) {
        current = fix_graph(current, v);
        order.push_back(v);
        remaining.erase(v);
        advanced = true;
        break;
      }
    }
    if (!advanced) return std::nullopt;
  }
  return order;
}

// ---------------------------------------------------------------------------
// Identification result.  NotIdentified carries the witness district and the
// graph it fails in, so the caller can re-run reachable() to confirm.

struct IdResult {
  bool identified = false;
  ExprPtr expr;
  VertexSet witness_district;
  MixedGraph witness_graph;

  static IdResult success(ExprPtr e) {
    IdResult r;
    r.identified = true;
    r.expr = std::move(e);
    return r;
  }

  static IdResult failure(VertexSet district, MixedGraph graph) {
    IdResult r;
    r.identified = false;
    r.witness_district = std::move(district);
    r.witness_graph = std::move(graph);
    return r;
  }
};

}  // namespace sgid
