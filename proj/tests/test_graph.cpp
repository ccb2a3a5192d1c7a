#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "sgid/graph.hpp"

using namespace sgid;

TEST_CASE("vertex and edge validation") {
  MixedGraph g;
  g.add_vertex("A");
  g.add_vertex("B");

  SECTION("duplicate vertex rejected") {
    REQUIRE_THROWS_AS(g.add_vertex("A"), GraphError);
  }
  SECTION("cardinality below two rejected") {
    REQUIRE_THROWS_AS(g.add_vertex("X", false, 1), GraphError);
  }
  SECTION("self loops rejected") {
    REQUIRE_THROWS_AS(g.add_edge("A", "A", EdgeKind::directed), GraphError);
    REQUIRE_THROWS_AS(g.add_edge("A", "A", EdgeKind::undirected), GraphError);
  }
  SECTION("unknown endpoint rejected") {
    REQUIRE_THROWS_AS(g.add_edge("A", "Z", EdgeKind::directed), GraphError);
  }
  SECTION("duplicate edge of the same kind rejected, symmetric kinds both ways") {
    g.add_edge("A", "B", EdgeKind::bidirected);
    REQUIRE_THROWS_AS(g.add_edge("B", "A", EdgeKind::bidirected), GraphError);
    REQUIRE(g.has_edge("B", "A", EdgeKind::bidirected));
  }
  SECTION("parallel edges of different kinds allowed") {
    g.add_edge("A", "B", EdgeKind::directed);
    g.add_edge("A", "B", EdgeKind::bidirected);
    REQUIRE(g.edges().size() == 2);
  }
}

TEST_CASE("fixed-vertex context rules") {
  MixedGraph g;
  g.add_vertex("W");
  g.add_vertex("V");
  g.add_edge("W", "V", EdgeKind::directed);
  g.set_fixed({"W"});
  REQUIRE(g.is_fixed("W"));
  REQUIRE(g.random_vertices() == VertexSet{"V"});

  SECTION("random into fixed rejected") {
    REQUIRE_THROWS_AS(g.add_edge("V", "W", EdgeKind::directed), GraphError);
  }
  SECTION("symmetric edge across the split rejected") {
    REQUIRE_THROWS_AS(g.add_edge("W", "V", EdgeKind::undirected), GraphError);
    REQUIRE_THROWS_AS(g.add_edge("W", "V", EdgeKind::bidirected), GraphError);
  }
  SECTION("set_fixed validates existing edges and rolls back on failure") {
    REQUIRE_THROWS_AS(g.set_fixed({"V"}), GraphError);
    REQUIRE(g.is_fixed("W"));  // unchanged after the failed update
  }
  SECTION("latent vertices cannot be fixed") {
    g.add_vertex("H", true);
    REQUIRE_THROWS_AS(g.set_fixed({"H"}), GraphError);
  }
}

TEST_CASE("relatives on the twelve-vertex example graph") {
  const MixedGraph g = fixtures::load("fig_2a");
  REQUIRE(g.vertex_count() == 12);

  SECTION("district closure of Y2") {
    REQUIRE(relatives(g, {"Y2"}, Relation::district) ==
            VertexSet{"A2", "Y2", "Y3"});
  }
  SECTION("parents and children are non-reflexive set extensions") {
    REQUIRE(relatives(g, {"M2"}, Relation::parents) == VertexSet{"A2", "C2"});
    REQUIRE(relatives(g, {"C2"}, Relation::children) ==
            VertexSet{"A2", "M2", "M3", "Y2"});
    REQUIRE(relatives(g, {"M2", "M3"}, Relation::parents) ==
            VertexSet{"A2", "A3", "C2"});
  }
  SECTION("ancestors and descendants are reflexive") {
    REQUIRE(relatives(g, {"Y1"}, Relation::ancestors) ==
            VertexSet{"A1", "C1", "M1", "Y1"});
    REQUIRE(relatives(g, {"A2"}, Relation::descendants) ==
            VertexSet{"A2", "M2", "Y2"});
  }
  SECTION("non-descendants complement descendants") {
    REQUIRE(relatives(g, {"A2"}, Relation::non_descendants) ==
            VertexSet{"A1", "A3", "C1", "C2", "C3", "M1", "M3", "Y1", "Y3"});
  }
  SECTION("anterior walks undirected edges both ways") {
    // Y3 <- M3 - M2 - M1 <- A1 <- C1 pulls in the whole mediator block and
    // everything upstream of it.
    REQUIRE(relatives(g, {"Y3"}, Relation::anterior) ==
            VertexSet{"A1", "A2", "A3", "C1", "C2", "C3", "M1", "M2", "M3",
                      "Y3"});
  }
  SECTION("empty seed gives empty result for every kind") {
    for (Relation k :
         {Relation::parents, Relation::children, Relation::ancestors,
          Relation::descendants, Relation::neighbors,
          Relation::non_descendants, Relation::district, Relation::anterior,
          Relation::exterior, Relation::strict_exterior}) {
      if (k == Relation::non_descendants) continue;  // complement of empty
      REQUIRE(relatives(g, {}, k).empty());
    }
  }
  SECTION("isolated vertex is its own district") {
    MixedGraph h;
    h.add_vertex("X");
    REQUIRE(relatives(h, {"X"}, Relation::district) == VertexSet{"X"});
  }
}

TEST_CASE("anterior closure matches the post-intervention outcome set") {
  const MixedGraph gfa = fixtures::load("fig_2d");
  const VertexSet targets{"A1", "A2", "A3", "M2"};
  const VertexSet y_star = set_difference_of(
      relatives(gfa, {"Y2", "Y3"}, Relation::anterior), targets);
  REQUIRE(y_star == VertexSet{"C2", "C3", "M3", "Y2", "Y3"});
}

TEST_CASE("exterior and strict exterior") {
  const MixedGraph g = fixtures::load("fig_2a");
  // Exterior of M2 runs forward through M2's whole block and onward.
  REQUIRE(relatives(g, {"M2"}, Relation::exterior) ==
          VertexSet{"M1", "M2", "M3", "Y1", "Y2", "Y3"});
  // Strict exterior removes M2's undirected component {M1, M2, M3}.
  REQUIRE(relatives(g, {"M2"}, Relation::strict_exterior) ==
          VertexSet{"Y1", "Y2", "Y3"});
  // Singleton block: strict exterior drops only the vertex itself.
  REQUIRE(relatives(g, {"A1"}, Relation::strict_exterior) ==
          VertexSet{"M1", "M2", "M3", "Y1", "Y2", "Y3"});
}

TEST_CASE("blocks and districts partition the example graph") {
  const MixedGraph g = fixtures::load("fig_2a");

  const std::vector<VertexSet> nt = nontrivial_blocks(g);
  REQUIRE(nt == std::vector<VertexSet>{{"C2", "C3"}, {"M1", "M2", "M3"}});
  REQUIRE(block_vertices(g) == VertexSet{"C2", "C3", "M1", "M2", "M3"});
  REQUIRE(district_vertices(g) ==
          VertexSet{"A1", "A2", "A3", "C1", "Y1", "Y2", "Y3"});

  const std::vector<VertexSet> ds = districts(g);
  REQUIRE(ds == std::vector<VertexSet>{
                    {"A1", "C1", "Y1"}, {"A2", "Y2", "Y3"}, {"A3"}});
}

TEST_CASE("districts of a DAG are singletons") {
  const MixedGraph g = fixtures::chain_cay();
  REQUIRE(districts(g) == std::vector<VertexSet>{{"A"}, {"C"}, {"Y"}});
}

TEST_CASE("districts of the anterior-closure subgraph") {
  const MixedGraph g = fixtures::load("fig_2e");
  REQUIRE(nontrivial_blocks(g) == std::vector<VertexSet>{{"C2", "C3"}});
  REQUIRE(districts(g) == std::vector<VertexSet>{{"M3"}, {"Y2", "Y3"}});
}

TEST_CASE("classification lattice") {
  SECTION("twelve-vertex example is a segregated graph") {
    const Classification c = classify(fixtures::load("fig_2a"));
    REQUIRE(c.segregated);
    REQUIRE(c.partially_directed_acyclic);
    REQUIRE(c.is_sg);
    REQUIRE_FALSE(c.is_dag);
    REQUIRE_FALSE(c.is_cg);
    REQUIRE_FALSE(c.is_admg);
    REQUIRE(c.graph_class == GraphClass::SG);
  }
  SECTION("partially directed cycle detected via block contraction") {
    const Classification c = classify(fixtures::pd_cycle_wxy());
    REQUIRE_FALSE(c.partially_directed_acyclic);
    REQUIRE_FALSE(c.is_sg);
    REQUIRE_FALSE(c.graph_class.has_value());
    REQUIRE_FALSE(c.cycle_witness.empty());
  }
  SECTION("vertex with undirected and bidirected edges is not segregated") {
    MixedGraph g;
    g.add_vertex("A");
    g.add_vertex("B");
    g.add_vertex("C");
    g.add_edge("A", "B", EdgeKind::undirected);
    g.add_edge("A", "C", EdgeKind::bidirected);
    const Classification c = classify(g);
    REQUIRE_FALSE(c.segregated);
    REQUIRE(c.segregation_witness == "A");
    REQUIRE_FALSE(c.is_sg);
  }
  SECTION("a DAG belongs to every super-class") {
    const Classification c = classify(fixtures::chain_cay());
    REQUIRE(c.is_dag);
    REQUIRE(c.is_cg);
    REQUIRE(c.is_admg);
    REQUIRE(c.is_sg);
    REQUIRE(c.graph_class == GraphClass::DAG);
  }
  SECTION("pure undirected graph is an MRF and a CG") {
    MixedGraph g;
    g.add_vertex("A");
    g.add_vertex("B");
    g.add_edge("A", "B", EdgeKind::undirected);
    const Classification c = classify(g);
    REQUIRE(c.is_mrf);
    REQUIRE(c.is_cg);
    REQUIRE(c.is_sg);
    REQUIRE(c.graph_class == GraphClass::MRF);
  }
  SECTION("context split yields conditional classes") {
    MixedGraph g;
    g.add_vertex("W");
    g.add_vertex("V");
    g.add_vertex("U");
    g.add_edge("W", "V", EdgeKind::directed);
    g.add_edge("V", "U", EdgeKind::bidirected);
    g.set_fixed({"W"});
    const Classification c = classify(g);
    REQUIRE(c.is_cadmg);
    REQUIRE_FALSE(c.is_admg);
    REQUIRE_FALSE(c.is_ccg);
    REQUIRE(c.graph_class == GraphClass::CADMG);

    MixedGraph h;
    h.add_vertex("W");
    h.add_vertex("V");
    h.add_vertex("U");
    h.add_edge("W", "V", EdgeKind::directed);
    h.add_edge("V", "U", EdgeKind::undirected);
    h.set_fixed({"W"});
    REQUIRE(classify(h).graph_class == GraphClass::CCG);
  }
}

TEST_CASE("block topological order") {
  SECTION("chain of singletons") {
    REQUIRE(block_topological_order(fixtures::chain_cay()) ==
            std::vector<VertexSet>{{"C"}, {"A"}, {"Y"}});
  }
  SECTION("elections graph puts the outcome block last") {
    const std::vector<VertexSet> order =
        block_topological_order(fixtures::load("fig_1b"));
    REQUIRE(order == std::vector<VertexSet>{
                         {"C_l"}, {"C_r"}, {"A_l"}, {"A_r"}, {"Y_l", "Y_r"}});
  }
  SECTION("partially directed cycle is an error") {
    REQUIRE_THROWS_AS(block_topological_order(fixtures::pd_cycle_wxy()),
                      GraphError);
  }
  SECTION("directed edge inside a block is an error") {
    MixedGraph g;
    g.add_vertex("X");
    g.add_vertex("Y");
    g.add_edge("X", "Y", EdgeKind::undirected);
    g.add_edge("X", "Y", EdgeKind::directed);
    REQUIRE_THROWS_AS(block_topological_order(g), GraphError);
  }
  SECTION("global vertex order refines blocks lexicographically") {
    const std::vector<std::string> order =
        vertex_order(fixtures::load("fig_2a"));
    REQUIRE(order == std::vector<std::string>{"C1", "A1", "C2", "C3", "A2",
                                              "A3", "M1", "M2", "M3", "Y1",
                                              "Y2", "Y3"});
  }
}

TEST_CASE("relation properties on the corpus graphs") {
  for (const std::string name :
       {"fig_1b", "fig_1c", "fig_2a", "fig_2d", "fig_2e", "frontdoor", "bow"}) {
    const MixedGraph g = fixtures::load(name);
    INFO("graph " << name);

    // Partition property: districts plus nontrivial blocks tile the randoms.
    VertexSet tiled;
    std::size_t total = 0;
    for (const auto& d : districts(g)) {
      tiled.insert(d.begin(), d.end());
      total += d.size();
    }
    for (const auto& b : nontrivial_blocks(g)) {
      tiled.insert(b.begin(), b.end());
      total += b.size();
    }
    REQUIRE(tiled == g.random_vertices());
    REQUIRE(total == tiled.size());

    for (const auto& v : g.random_vertices()) {
      // Reflexivity conventions.
      for (Relation k : {Relation::ancestors, Relation::descendants,
                         Relation::district, Relation::anterior,
                         Relation::exterior}) {
        REQUIRE(contains(relatives(g, {v}, k), v));
      }
      REQUIRE_FALSE(contains(relatives(g, {v}, Relation::strict_exterior), v));

      // Idempotence of the closure relations.
      for (Relation k : {Relation::ancestors, Relation::descendants,
                         Relation::anterior, Relation::exterior}) {
        const VertexSet once = relatives(g, {v}, k);
        REQUIRE(relatives(g, once, k) == once);
      }
    }
  }
}

TEST_CASE("relatives shrink monotonically under induced subgraphs") {
  const MixedGraph g = fixtures::load("fig_2a");
  const VertexSet keep{"A2", "C2", "C3", "M2", "M3", "Y2", "Y3"};
  const MixedGraph sub = induced_subgraph(g, keep);
  for (const auto& v : keep) {
    for (Relation k : {Relation::parents, Relation::children,
                       Relation::ancestors, Relation::descendants,
                       Relation::neighbors, Relation::district,
                       Relation::anterior, Relation::exterior}) {
      REQUIRE(is_subset_of(relatives(sub, {v}, k),
                           set_union_of(relatives(g, {v}, k),
                                        g.fixed_vertices())));
    }
  }
}

TEST_CASE("induced subgraph keeps vertex metadata and context") {
  MixedGraph g;
  g.add_vertex("W", false, 3);
  g.add_vertex("V");
  g.add_vertex("H", true, 4);
  g.add_edge("W", "V", EdgeKind::directed);
  g.add_edge("H", "V", EdgeKind::directed);
  g.set_fixed({"W"});

  const MixedGraph sub = induced_subgraph(g, {"W", "V"});
  REQUIRE(sub.vertex("W").cardinality == 3);
  REQUIRE(sub.is_fixed("W"));
  REQUIRE(sub.has_edge("W", "V", EdgeKind::directed));
  REQUIRE_FALSE(sub.has_vertex("H"));
}

TEST_CASE("conditional graph drops edges into the fixed side") {
  const MixedGraph g = fixtures::load("fig_2a");
  const VertexSet random{"A1", "A2", "A3", "C1", "Y1", "Y2", "Y3"};
  const VertexSet fixed{"C2", "C3", "M1", "M2", "M3"};
  const MixedGraph gd = conditional_graph(g, random, fixed);

  REQUIRE(gd.has_edge("M1", "Y1", EdgeKind::directed));
  REQUIRE(gd.has_edge("C2", "A2", EdgeKind::directed));
  REQUIRE_FALSE(gd.has_edge("A1", "M1", EdgeKind::directed));
  REQUIRE_FALSE(gd.has_edge("A2", "M2", EdgeKind::directed));
  // Fixed-side internal edges are retained for display but ignored by
  // classification, so the result still counts as a CADMG.
  REQUIRE(gd.has_edge("M1", "M2", EdgeKind::undirected));
  REQUIRE(gd.has_edge("C2", "M3", EdgeKind::directed));
  REQUIRE(classify(gd).is_cadmg);
  // Random-side structure matches the shipped conditional graph file.
  const MixedGraph expected = fixtures::load("fig_2c");
  REQUIRE(expected.edges() == gd.edges());
  REQUIRE(expected.fixed_vertices() == gd.fixed_vertices());
}

TEST_CASE("augmented graph marries parents and drops orientation") {
  const MixedGraph g = fixtures::load("fig_2a");
  const MixedGraph aug = augmented_graph(g, {"M1", "M2", "M3"});
  REQUIRE(aug.vertex_names() ==
          VertexSet{"A1", "A2", "A3", "C2", "M1", "M2", "M3"});
  for (const auto& e : aug.edges()) REQUIRE(e.kind == EdgeKind::undirected);
  REQUIRE(aug.has_edge("M1", "M2", EdgeKind::undirected));
  REQUIRE(aug.has_edge("A1", "M1", EdgeKind::undirected));
  // Parents of the block are pairwise married.
  REQUIRE(aug.has_edge("A1", "A2", EdgeKind::undirected));
  REQUIRE(aug.has_edge("A1", "C2", EdgeKind::undirected));
  REQUIRE(aug.has_edge("A2", "A3", EdgeKind::undirected));
}

TEST_CASE("clique enumeration is deterministic") {
  MixedGraph g;
  for (const std::string v : {"A", "B", "C", "D"}) g.add_vertex(v);
  g.add_edge("A", "B", EdgeKind::undirected);
  g.add_edge("B", "C", EdgeKind::undirected);
  g.add_edge("A", "C", EdgeKind::undirected);
  g.add_edge("C", "D", EdgeKind::undirected);
  REQUIRE(cliques(g) == std::vector<VertexSet>{{"A", "B", "C"}, {"C", "D"}});
}

TEST_CASE("graph JSON round trip") {
  const MixedGraph g = fixtures::load("fig_2c");
  const MixedGraph back = graph_from_json(graph_to_json(g));
  REQUIRE(back.vertex_names() == g.vertex_names());
  REQUIRE(back.edges() == g.edges());
  REQUIRE(back.fixed_vertices() == g.fixed_vertices());
  REQUIRE(back.vertex("Y2").cardinality == 2);

  REQUIRE_THROWS_AS(graph_from_json(nlohmann::json::object()), ConfigError);
  REQUIRE_THROWS_AS(load_graph("/nonexistent/file.json"), ConfigError);
}
