// Tests for the symbolic kernel algebra: rendering, canonicalization,
// marginalization, conditioning, fixing, and reachability.

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "fixtures.hpp"
#include "sgid/estimand.hpp"
#include "sgid/intervention.hpp"

namespace {

using sgid::Entry;
using sgid::ExprPtr;
using sgid::VertexSet;

ExprPtr cpd(const VertexSet& head, const VertexSet& tail) {
  return sgid::make_cpd(head, tail);
}

Entry const_entry(const std::string& var) {
  return Entry(var, sgid::Substitution::constant(var));
}

sgid::Policy stochastic_policy(const std::string& target,
                               const VertexSet& inputs) {
  return sgid::Policy{target, inputs,
                      sgid::PolicyMechanism::make_function("f_" + target,
                                                           false)};
}

sgid::Policy deterministic_policy(const std::string& target,
                                  const VertexSet& inputs) {
  return sgid::Policy{target, inputs,
                      sgid::PolicyMechanism::make_function("f_" + target,
                                                           true)};
}

// The interference policy set on the three-unit network: treatments react
// to covariates and to each other (mutually for the A2/A3 pair), and the
// M2 mediator is set in response to its block neighbor M3.
sgid::PolicySet three_unit_policy_set() {
  return sgid::PolicySet{{
      stochastic_policy("A1", {"C1", "C2"}),
      stochastic_policy("A2", {"A3", "C2", "C3"}),
      stochastic_policy("A3", {"A2", "C3"}),
      stochastic_policy("M2", {"A2", "C2", "M3"}),
  }};
}

}  // namespace

TEST_CASE("atom rendering is deterministic and sorted") {
  auto joint = cpd({"B", "A"}, {});
  CHECK(sgid::render_text(joint) == "p(A,B)");
  CHECK(sgid::render(joint, sgid::RenderFormat::latex) == "p(A, B)");

  auto conditional_atom = cpd({"Y2"}, {"M2", "C2", "A2"});
  CHECK(sgid::render_text(conditional_atom) == "p(Y2|A2,C2,M2)");
  CHECK(sgid::render(conditional_atom, sgid::RenderFormat::latex) ==
        "p(Y2 \\mid A2, C2, M2)");

  auto one = sgid::make_one();
  CHECK(sgid::render_text(one) == "1");
}

TEST_CASE("substituted entries render as symbols and keep variable order") {
  // A constant keeps its variable's sort position: a2 stays where A2 was.
  auto atom = sgid::make_cpd({Entry("M2")}, {Entry("C2"), const_entry("A2")});
  CHECK(sgid::render_text(atom) == "p(M2|a2,C2)");

  // A policy application sorts after plain names.
  auto policy = deterministic_policy("A_l", {"C_l", "C_r"});
  auto block_factor = sgid::make_cpd(
      {Entry("Y_l"), Entry("Y_r")},
      {Entry("C_l"), Entry("C_r"), Entry("A_r"),
       Entry("A_l", sgid::Substitution::policy_value(policy))});
  CHECK(sgid::render_text(block_factor) ==
        "p(Y_l,Y_r|A_r,C_l,C_r,f[A_l](C_l,C_r))");
  CHECK(sgid::render(block_factor, sgid::RenderFormat::latex) ==
        "p(Y_l, Y_r \\mid A_r, C_l, C_r, f_{A_l}(C_l, C_r))");

  // Substituting a stochastic policy's value is rejected.
  auto stochastic = stochastic_policy("A_l", {"C_l"});
  CHECK_THROWS_AS(sgid::Substitution::policy_value(stochastic),
                  sgid::EstimandError);
}

TEST_CASE("policy factors and equilibrium factors render with their tags") {
  auto f = sgid::make_policy_factor(stochastic_policy("A2", {"A3", "C2"}));
  CHECK(sgid::render_text(f) == "f[A2](A2|A3,C2)");
  CHECK(sgid::render(f, sgid::RenderFormat::latex) ==
        "f_{A2}(A2 \\mid A3, C2)");

  std::vector<sgid::PStarMember> members(2);
  members[0].name = "M3";
  members[0].observed_args = {"A3", "C2", "M2"};
  members[1].name = "M2";
  members[1].is_target = true;
  members[1].policy = stochastic_policy("M2", {"A2", "C2", "M3"});
  auto pstar = sgid::make_pstar(members, {Entry("A2"), Entry("A3"),
                                          Entry("C2")});
  CHECK(sgid::render_text(pstar) == "p*(M2,M3|A2,A3,C2)");
  CHECK(sgid::render(pstar, sgid::RenderFormat::latex) ==
        "p^{\\star}(M2, M3 \\mid A2, A3, C2)");
}

TEST_CASE("product rendering separates positive and negative exponents") {
  auto ab = cpd({"A", "B"}, {});
  auto a = cpd({"A"}, {});
  auto b_given_a = cpd({"B"}, {"A"});

  auto ratio = sgid::make_product({{ab, 1}, {a, -1}});
  CHECK(sgid::render_text(ratio) == "p(A,B) / p(A)");

  auto reciprocal = sgid::make_product({{a, -1}});
  CHECK(sgid::render_text(reciprocal) == "1 / p(A)");

  auto squared = sgid::make_product({{b_given_a, 2}});
  CHECK(sgid::render_text(squared) == "p(B|A) p(B|A)");

  // A sum that is not the last positive factor is parenthesized.
  auto sum = sgid::make_sum({"A"}, sgid::make_product({{ab, 1}}));
  auto with_trailing = sgid::make_product({{sum, 1}, {a, -1}});
  CHECK(sgid::render_text(with_trailing) == "(Σ_{A} p(A,B)) / p(A)");
  auto sum_last = sgid::make_product({{b_given_a, 1}, {sum, 1}});
  CHECK(sgid::render_text(sum_last) == "p(B|A) Σ_{A} p(A,B)");
}

TEST_CASE("free variables respect substitutions, sums, and fixing") {
  auto policy = deterministic_policy("A_l", {"C_l", "C_r"});
  auto atom = sgid::make_cpd(
      {Entry("Y_l")},
      {const_entry("A_r"), Entry("A_l", sgid::Substitution::policy_value(
                                            policy))});
  // The constant a_r contributes nothing; the policy contributes its inputs.
  CHECK(sgid::free_variables(atom) == VertexSet{"C_l", "C_r", "Y_l"});

  auto summed = sgid::make_sum({"Y_l"}, atom);
  CHECK(sgid::free_variables(summed) == VertexSet{"C_l", "C_r"});

  auto g = fixtures::load("frontdoor");
  auto fixed = sgid::make_fix(cpd({"Y2"}, {"M2"}), "M2", g);
  CHECK(sgid::free_variables(fixed) == VertexSet{"M2", "Y2"});
}

TEST_CASE("canonicalize cancels reciprocal factors") {
  auto ab = cpd({"A", "B"}, {});
  auto a = cpd({"A"}, {});
  auto expr = sgid::make_product({{ab, 1}, {a, -1}, {a, 1}});
  CHECK(sgid::render_text(sgid::canonicalize(expr)) == "p(A,B)");
}

TEST_CASE("canonicalize collapses vacuous sums") {
  auto y = cpd({"Y"}, {});
  auto expr = sgid::make_sum({"X"}, y);
  CHECK(sgid::render_text(sgid::canonicalize(expr)) == "p(Y)");
}

TEST_CASE("canonicalize flattens products and merges sums") {
  auto a = cpd({"A"}, {});
  auto b = cpd({"B"}, {"A"});
  auto inner = sgid::make_product({{a, 1}, {b, 1}});
  auto outer = sgid::make_product({{inner, -1}, {a, 1}});
  CHECK(sgid::render_text(sgid::canonicalize(outer)) == "1 / p(B|A)");

  auto nested = sgid::make_sum({"A"}, sgid::make_sum({"B"}, inner));
  auto canon = sgid::canonicalize(nested);
  REQUIRE(canon->kind == sgid::ExprKind::sum_over);
  CHECK(canon->sum_vars == VertexSet{"A", "B"});

  // A shadowed outer binder is vacuous and dropped.
  auto shadowed = sgid::make_sum({"A"}, sgid::make_sum({"A"}, a));
  CHECK(sgid::render_text(sgid::canonicalize(shadowed)) == "Σ_{A} p(A)");
}

TEST_CASE("canonicalize never absorbs sums into atom heads") {
  // The joint block factor keeps its sum even though Y_r is a head entry;
  // only kernel_marginalize performs head absorption.
  auto block = cpd({"Y_l", "Y_r"}, {"A_r", "C_l", "C_r"});
  auto expr = sgid::make_sum({"Y_r"}, block);
  CHECK(sgid::render_text(sgid::canonicalize(expr)) ==
        "Σ_{Y_r} p(Y_l,Y_r|A_r,C_l,C_r)");
}

TEST_CASE("kernel_marginalize absorbs head variables") {
  auto ab = cpd({"A", "B"}, {});
  CHECK(sgid::render_text(sgid::kernel_marginalize(ab, {"B"})) == "p(A)");
  CHECK(sgid::render_text(sgid::kernel_marginalize(ab, {"A", "B"})) == "1");

  // Chain factorization telescopes from the sink upward.
  auto chain = sgid::make_product({{cpd({"A"}, {}), 1},
                                   {cpd({"B"}, {"A"}), 1},
                                   {cpd({"C"}, {"B"}), 1}});
  CHECK(sgid::render_text(sgid::kernel_marginalize(chain, {"B", "C"})) ==
        "p(A)");

  // A variable in another factor's tail cannot be absorbed.
  auto stuck = sgid::make_product({{cpd({"A"}, {}), 1},
                                   {cpd({"Y"}, {"A"}), 1}});
  CHECK(sgid::render_text(sgid::kernel_marginalize(stuck, {"A"})) ==
        "Σ_{A} p(A) p(Y|A)");
}

TEST_CASE("kernel_marginalize factors var-free terms out of stuck sums") {
  auto q = sgid::make_product({{cpd({"C1"}, {}), 1},
                               {cpd({"M1"}, {"A1", "M2"}), 1},
                               {cpd({"Y1"}, {"A1", "C1", "M1"}), 1}});
  auto out = sgid::kernel_marginalize(q, {"C1"});
  CHECK(sgid::render_text(out) ==
        "p(M1|A1,M2) Σ_{C1} p(C1) p(Y1|A1,C1,M1)");
}

TEST_CASE("kernel_marginalize pushes into nested sums") {
  // T = Σ_{C1'} p(C1') p(Y1|A1,C1',M1); marginalizing Y1 and then A1, M1
  // collapses T to one because the inner head absorbs once merged.
  auto t = sgid::make_sum(
      {"C1'"}, sgid::make_product({{cpd({"C1'"}, {}), 1},
                                   {cpd({"Y1"}, {"A1", "C1'", "M1"}), 1}}));
  auto with_factor =
      sgid::make_product({{cpd({"M1"}, {"A1", "M2"}), 1}, {t, 1}});
  CHECK(sgid::render_text(sgid::kernel_marginalize(with_factor, {"Y1"})) ==
        "p(M1|A1,M2)");
  CHECK(sgid::render_text(sgid::kernel_marginalize(
            with_factor, {"M1", "Y1"})) == "1");
}

TEST_CASE("kernel_condition moves head entries into the tail") {
  auto ab = cpd({"A", "B"}, {});
  CHECK(sgid::render_text(sgid::kernel_condition(ab, {"A"})) == "p(B|A)");

  // Chain rule round-trip: p(A) p(B|A) cancels back to p(A,B)'s pieces.
  auto chain = sgid::make_product(
      {{sgid::kernel_marginalize(ab, {"B"}), 1},
       {sgid::kernel_condition(ab, {"A"}), 1}});
  CHECK(sgid::render_text(sgid::canonicalize(chain)) == "p(A) p(B|A)");

  // Conditioning a product falls back to the explicit ratio.
  auto joint = sgid::make_product({{cpd({"A"}, {}), 1},
                                   {cpd({"Y"}, {"A"}), 1}});
  CHECK(sgid::render_text(sgid::kernel_condition(joint, {"Y"})) ==
        "p(A) p(Y|A) / (Σ_{A} p(A) p(Y|A))");
}

TEST_CASE("substitute rewrites free occurrences everywhere") {
  auto a2 = sgid::Substitution::constant("A2");
  auto atom = cpd({"M2"}, {"A2", "C2"});
  auto subbed = sgid::substitute(atom, "A2", a2);
  CHECK(sgid::render_text(subbed) == "p(M2|a2,C2)");

  // A head occurrence evaluates the density at the substituted point.
  // Non-cancelling fixes leave such heads inside their ratio sums.
  CHECK(sgid::render_text(sgid::substitute(cpd({"A2"}, {"C2"}), "A2", a2)) ==
        "p(a2|C2)");

  // Bound occurrences are left alone.
  auto summed = sgid::make_sum({"A2"}, sgid::make_product({{atom, 1}}));
  CHECK(sgid::substitute(summed, "A2", a2) == summed);
}

TEST_CASE("fixability matches the descendant-district criterion") {
  auto g = fixtures::load("frontdoor");
  CHECK_FALSE(sgid::fixable(g, "A2"));  // Y2 is a descendant spouse
  CHECK(sgid::fixable(g, "M2"));
  CHECK(sgid::fixable(g, "C2"));
  CHECK(sgid::fixable(g, "Y2"));

  // Block vertices are never fixable.
  auto sg = fixtures::load("fig_1b");
  for (const auto& v : sg.random_vertices()) {
    if (!sg.neighbors(v).empty()) CHECK_FALSE(sgid::fixable(sg, v));
  }
}

TEST_CASE("fix_graph removes incoming edges and marks the vertex fixed") {
  auto g = fixtures::load("frontdoor");
  auto fixed = sgid::fix_graph(g, "A2");
  CHECK(fixed.is_fixed("A2"));
  CHECK_FALSE(fixed.has_edge("C2", "A2", sgid::EdgeKind::directed));
  CHECK_FALSE(fixed.has_edge("A2", "Y2", sgid::EdgeKind::bidirected));
  CHECK(fixed.has_edge("A2", "M2", sgid::EdgeKind::directed));
  CHECK_THROWS_AS(sgid::fix_graph(fixed, "A2"), sgid::EstimandError);
}

TEST_CASE("fixing the front-door chain produces the classic mixture") {
  auto g = fixtures::load("frontdoor");
  // Chain expansion of the observed joint in the global vertex order.
  ExprPtr q = sgid::make_product({{cpd({"C2"}, {}), 1},
                                  {cpd({"A2"}, {"C2"}), 1},
                                  {cpd({"M2"}, {"A2", "C2"}), 1},
                                  {cpd({"Y2"}, {"A2", "C2", "M2"}), 1}});

  auto [q1, g1] = sgid::fix_vertex(q, "C2", g);
  CHECK(sgid::render_text(q1) == "p(A2|C2) p(M2|A2,C2) p(Y2|A2,C2,M2)");

  CHECK_FALSE(sgid::fixable(g1, "A2"));
  auto [q2, g2] = sgid::fix_vertex(q1, "M2", g1);
  CHECK(sgid::render_text(q2) == "p(A2|C2) p(Y2|A2,C2,M2)");

  auto [q3, g3] = sgid::fix_vertex(q2, "A2", g2);
  CHECK(sgid::render_text(q3) ==
        "Σ_{A2'} p(A2'|C2) p(Y2|A2',C2,M2)");
  CHECK(g3.random_vertices() == VertexSet{"Y2"});
  CHECK(sgid::free_variables(q3) == VertexSet{"C2", "M2", "Y2"});
}

TEST_CASE("reachable certifies districts and reports failures") {
  auto frontdoor = fixtures::load("frontdoor");
  auto order = sgid::reachable(frontdoor, {"Y2"});
  REQUIRE(order.has_value());
  CHECK(*order == std::vector<std::string>{"C2", "M2", "A2"});

  // Everything already random: the empty sequence certifies trivially.
  auto all = sgid::reachable(frontdoor, frontdoor.random_vertices());
  REQUIRE(all.has_value());
  CHECK(all->empty());

  // The bow destroys reachability of the outcome's district.
  auto bow = fixtures::load("bow");
  CHECK_FALSE(sgid::reachable(bow, {"Y1"}).has_value());
  CHECK_FALSE(sgid::reachable(bow, {"A1", "Y1"}).has_value());
}

TEST_CASE("district kernel chain telescopes on the intervened network") {
  // Conditional graph over the district part of the intervened three-unit
  // network; block vertices form the context.
  auto g_fa = fixtures::load("fig_2d");
  VertexSet district_part{"A1", "C1", "M1", "Y1", "Y2", "Y3"};
  auto gd = sgid::conditional_graph(
      g_fa, district_part,
      sgid::set_difference_of(g_fa.vertex_names(), district_part));

  auto f_a1 = sgid::make_policy_factor(stochastic_policy("A1", {"C1", "C2"}));
  ExprPtr q = sgid::make_product({
      {cpd({"C1"}, {}), 1},
      {f_a1, 1},
      {cpd({"M1"}, {"A1", "M2"}), 1},
      {cpd({"Y1"}, {"A1", "C1", "M1"}), 1},
      {cpd({"Y2"}, {"C2", "M2"}), 1},
      {cpd({"Y3"}, {"C2", "M2", "M3", "Y2"}), 1},
  });

  // Greedy order: the policy factor divides out first.
  auto [q1, g1] = sgid::fix_vertex(q, "A1", gd);
  CHECK(sgid::render_text(q1) ==
        "p(C1) p(M1|A1,M2) p(Y1|A1,C1,M1) p(Y2|C2,M2) p(Y3|C2,M2,M3,Y2)");

  // C1 shares a district with Y1, so its divisor leaves a compound ratio
  // whose bound variable is renamed.
  auto [q2, g2] = sgid::fix_vertex(q1, "C1", g1);
  CHECK(sgid::render_text(q2) ==
        "p(M1|A1,M2) p(Y2|C2,M2) p(Y3|C2,M2,M3,Y2) "
        "Σ_{C1'} p(C1') p(Y1|A1,C1',M1)");

  auto [q3, g3] = sgid::fix_vertex(q2, "M1", g2);
  CHECK(sgid::render_text(q3) ==
        "p(Y2|C2,M2) p(Y3|C2,M2,M3,Y2) Σ_{C1'} p(C1') p(Y1|A1,C1',M1)");

  auto [q4, g4] = sgid::fix_vertex(q3, "Y1", g3);
  CHECK(sgid::render_text(q4) == "p(Y2|C2,M2) p(Y3|C2,M2,M3,Y2)");
  CHECK(g4.random_vertices() == VertexSet{"Y2", "Y3"});
}

TEST_CASE("display-variant chain divides by the marginal of the source") {
  // Without the C1/Y1 confounding the same chain telescopes plainly and the
  // first divisor is exactly p(C1).
  auto g_fa = fixtures::load("fig_2d");
  g_fa.remove_edge("C1", "Y1", sgid::EdgeKind::bidirected);
  VertexSet district_part{"A1", "C1", "M1", "Y1", "Y2", "Y3"};
  auto gd = sgid::conditional_graph(
      g_fa, district_part,
      sgid::set_difference_of(g_fa.vertex_names(), district_part));

  auto f_a1 = sgid::make_policy_factor(stochastic_policy("A1", {"C1", "C2"}));
  ExprPtr q = sgid::make_product({
      {cpd({"C1"}, {}), 1},
      {f_a1, 1},
      {cpd({"M1"}, {"A1", "M2"}), 1},
      {cpd({"Y1"}, {"A1", "M1"}), 1},
      {cpd({"Y2"}, {"C2", "M2"}), 1},
      {cpd({"Y3"}, {"C2", "M2", "M3", "Y2"}), 1},
  });

  auto [q1, g1] = sgid::fix_vertex(q, "C1", gd);
  CHECK(sgid::render_text(q1) ==
        "f[A1](A1|C1,C2) p(M1|A1,M2) p(Y1|A1,M1) p(Y2|C2,M2) "
        "p(Y3|C2,M2,M3,Y2)");

  auto [q2, g2] = sgid::fix_vertex(q1, "A1", g1);
  auto [q3, g3] = sgid::fix_vertex(q2, "M1", g2);
  auto [q4, g4] = sgid::fix_vertex(q3, "Y1", g3);
  CHECK(sgid::render_text(q4) == "p(Y2|C2,M2) p(Y3|C2,M2,M3,Y2)");
  CHECK(g4.fixed_vertices() ==
        sgid::set_difference_of(g_fa.vertex_names(), VertexSet{"Y2", "Y3"}));
}

TEST_CASE("graph intervention rewires the three-unit network as expected") {
  auto g = fixtures::load("fig_2a");
  auto ps = three_unit_policy_set();

  auto check = sgid::is_segregation_preserving(ps, g);
  CHECK(check.ok);

  auto intervened = sgid::intervene_graph(ps, g);
  auto expected = fixtures::load("fig_2d");
  CHECK(intervened.vertex_names() == expected.vertex_names());
  CHECK(intervened.edges() == expected.edges());
  CHECK(sgid::classify(intervened).is_sg);
}
