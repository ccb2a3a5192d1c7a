#pragma once

// JSON serialization for graphs, policies, distributions, and experiment
// configuration.  This is the only header that touches the vendored JSON
// library; everything else works with the in-memory types.
//
// Graph files look like:
//   {
//     "vertices": [{"name": "C1", "latent": false, "cardinality": 2}, ...],
//     "edges":    [{"tail": "C1", "head": "A1", "kind": "directed"}, ...],
//     "fixed":    ["M1"]
//   }
// "latent" defaults to false, "cardinality" to 2, and "fixed" to empty.

#include <fstream>
#include <string>

#include <json.hpp>

#include "sgid/common.hpp"
#include "sgid/graph.hpp"

namespace sgid {

inline nlohmann::json graph_to_json(const MixedGraph& g) {
  nlohmann::json out;
  out["vertices"] = nlohmann::json::array();
  for (const auto& name : g.vertex_names()) {
    const VertexInfo& info = g.vertex(name);
    out["vertices"].push_back({{"name", info.name},
                               {"latent", info.latent},
                               {"cardinality", info.cardinality}});
  }
  out["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges()) {
    out["edges"].push_back(
        {{"tail", e.tail}, {"head", e.head}, {"kind", to_string(e.kind)}});
  }
  out["fixed"] = nlohmann::json::array();
  for (const auto& name : g.fixed_vertices()) out["fixed"].push_back(name);
  return out;
}

inline MixedGraph graph_from_json(const nlohmann::json& in) {
  if (!in.is_object() || !in.contains("vertices") || !in.contains("edges")) {
    throw ConfigError("graph JSON must be an object with 'vertices' and 'edges'");
  }
  MixedGraph g;
  try {
    for (const auto& v : in.at("vertices")) {
      VertexInfo info;
      info.name = v.at("name").get<std::string>();
      info.latent = v.value("latent", false);
      info.cardinality = v.value("cardinality", 2);
      g.add_vertex(info);
    }
    for (const auto& e : in.at("edges")) {
      g.add_edge(e.at("tail").get<std::string>(),
                 e.at("head").get<std::string>(),
                 edge_kind_from_string(e.at("kind").get<std::string>()));
    }
    if (in.contains("fixed")) {
      VertexSet fixed;
      for (const auto& name : in.at("fixed")) {
        fixed.insert(name.get<std::string>());
      }
      g.set_fixed(fixed);
    }
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError(std::string("malformed graph JSON: ") + err.what());
  }
  return g;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  nlohmann::json parsed;
  try {
    in >> parsed;
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError("cannot parse '" + path + "': " + err.what());
  }
  return parsed;
}

inline MixedGraph load_graph(const std::string& path) {
  return graph_from_json(load_json_file(path));
}

inline void save_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

inline void save_graph(const std::string& path, const MixedGraph& g) {
  save_json_file(path, graph_to_json(g));
}

}  // namespace sgid
