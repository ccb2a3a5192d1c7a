#pragma once

// Shared primitives: error types, ordered vertex-name sets, and the small
// set-algebra helpers used throughout the graph, estimand, and evaluation
// code.  Vertex sets are ordered so that every iteration in the library is
// deterministic and output is byte-for-byte reproducible.

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgid {

// Ordered set of vertex names.  Lexicographic iteration order is relied on
// everywhere determinism matters (canonical estimand forms, tie-breaking).
using VertexSet = std::set<std::string>;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EstimandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline VertexSet set_union_of(const VertexSet& a, const VertexSet& b) {
  VertexSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

inline VertexSet set_intersection_of(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

inline VertexSet set_difference_of(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(out, out.end()));
  return out;
}

inline bool contains(const VertexSet& s, const std::string& v) {
  return s.find(v) != s.end();
}

inline bool is_subset_of(const VertexSet& a, const VertexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool intersects(const VertexSet& a, const VertexSet& b) {
  auto it_a = a.begin();
  auto it_b = b.begin();
  while (it_a != a.end() && it_b != b.end()) {
    if (*it_a == *it_b) return true;
    if (*it_a < *it_b) {
      ++it_a;
    } else {
      ++it_b;
    }
  }
  return false;
}

template <typename Container>
std::string join(const Container& items, const std::string& sep) {
  std::ostringstream out;
  bool first = true;
  for (const auto& item : items) {
    if (!first) out << sep;
    out << item;
    first = false;
  }
  return out.str();
}

}  // namespace sgid
