#pragma once

// Dense multi-way probability tables over named finite variables.  A Table
// stores one double per joint state; variables are kept sorted by name and
// states enumerate lexicographically (first variable most significant), so
// every derived table is byte-reproducible.  All estimand evaluation and the
// exact interventional oracle reduce to the operations here: pointwise
// product and quotient with axis alignment, marginalization, conditioning,
// slicing, and normalization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgid/common.hpp"

namespace sgid {

class Table {
 public:
  Table() : values_(1, 1.0) {}  // scalar 1: the empty product

  // Variables are sorted internally; cardinalities follow their variable.
  Table(const std::vector<std::pair<std::string, int>>& variables,
        double fill = 0.0) {
    std::vector<std::pair<std::string, int>> sorted = variables;
    std::sort(sorted.begin(), sorted.end());
    std::size_t size = 1;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i > 0 && sorted[i].first == sorted[i - 1].first) {
        throw EvaluationError("duplicate table variable '" + sorted[i].first +
                              "'");
      }
      if (sorted[i].second < 2) {
        throw EvaluationError("table variable '" + sorted[i].first +
                              "' needs cardinality >= 2");
      }
      names_.push_back(sorted[i].first);
      cards_.push_back(sorted[i].second);
      size *= static_cast<std::size_t>(sorted[i].second);
    }
    values_.assign(size, fill);
  }

  static Table scalar(double value) {
    Table t;
    t.values_[0] = value;
    return t;
  }

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int>& cards() const { return cards_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool is_scalar() const { return names_.empty(); }

  double scalar_value() const {
    if (!is_scalar()) throw EvaluationError("table is not a scalar");
    return values_[0];
  }

  int card_of(const std::string& name) const {
    return cards_[axis_of(name)];
  }

  bool has_variable(const std::string& name) const {
    return std::binary_search(names_.begin(), names_.end(), name);
  }

  VertexSet variable_set() const {
    return VertexSet(names_.begin(), names_.end());
  }

  // State tuples follow names_ order; the last variable varies fastest.
  std::size_t index_of(const std::vector<int>& state) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      idx = idx * static_cast<std::size_t>(cards_[i]) +
            static_cast<std::size_t>(state[i]);
    }
    return idx;
  }

  double& at(const std::vector<int>& state) { return values_[index_of(state)]; }
  double at(const std::vector<int>& state) const {
    return values_[index_of(state)];
  }

  double total() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  Table& normalize() {
    const double s = total();
    if (s <= 0.0) throw EvaluationError("cannot normalize non-positive table");
    for (double& v : values_) v /= s;
    return *this;
  }

  // Pointwise product with axis alignment: the result ranges over the union
  // of the two variable sets.  Shared variables must agree in cardinality.
  friend Table operator*(const Table& a, const Table& b) {
    return combine(a, b, /*divide=*/false);
  }

  // Pointwise quotient; zero denominators under nonzero numerators are a
  // support violation and throw.  0/0 is defined as 0 so that kernels with
  // structurally empty rows pass through.
  friend Table operator/(const Table& a, const Table& b) {
    return combine(a, b, /*divide=*/true);
  }

  // Sums out the given variables (missing names are ignored).
  Table marginalize_out(const VertexSet& drop) const {
    std::vector<std::pair<std::string, int>> kept;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (!contains(drop, names_[i])) kept.push_back({names_[i], cards_[i]});
    }
    Table out(kept, 0.0);
    std::vector<std::size_t> strides = strides_into(out);
    std::vector<int> state(names_.size(), 0);
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
      std::size_t out_idx = 0;
      for (std::size_t i = 0; i < names_.size(); ++i) {
        out_idx += strides[i] * static_cast<std::size_t>(state[i]);
      }
      out.values_[out_idx] += values_[idx];
      advance(state);
    }
    return out;
  }

  // Keeps only the given variables, summing out the rest.
  Table marginal(const VertexSet& keep) const {
    return marginalize_out(set_difference_of(variable_set(), keep));
  }

  // Conditional p(head | rest): divide by the margin over the non-head
  // variables.  head must be a subset of this table's variables.
  Table condition_on_rest(const VertexSet& head) const {
    for (const auto& h : head) {
      if (!has_variable(h)) {
        throw EvaluationError("conditional head variable '" + h +
                              "' not in table");
      }
    }
    return *this / marginalize_out(head);
  }

  // Fixes variables to concrete states and drops those axes.
  Table slice(const std::map<std::string, int>& assignment) const {
    std::vector<std::pair<std::string, int>> kept;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      auto it = assignment.find(names_[i]);
      if (it == assignment.end()) {
        kept.push_back({names_[i], cards_[i]});
      } else if (it->second < 0 || it->second >= cards_[i]) {
        throw EvaluationError("state " + std::to_string(it->second) +
                              " out of range for '" + names_[i] + "'");
      }
    }
    Table out(kept, 0.0);
    std::vector<int> state(names_.size(), 0);
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
      bool match = true;
      for (std::size_t i = 0; i < names_.size() && match; ++i) {
        auto it = assignment.find(names_[i]);
        if (it != assignment.end() && it->second != state[i]) match = false;
      }
      if (match) {
        std::vector<int> sub;
        for (std::size_t i = 0; i < names_.size(); ++i) {
          if (assignment.find(names_[i]) == assignment.end()) {
            sub.push_back(state[i]);
          }
        }
        out.at(sub) = values_[idx];
      }
      advance(state);
    }
    return out;
  }

  // Renames a variable; the result re-sorts axes to keep the invariant.
  Table rename(const std::string& from, const std::string& to) const {
    std::vector<std::pair<std::string, int>> vars;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      vars.push_back({names_[i] == from ? to : names_[i], cards_[i]});
    }
    Table out(vars, 0.0);
    std::vector<std::size_t> strides(names_.size());
    for (std::size_t i = 0; i < names_.size(); ++i) {
      const std::string& name = names_[i] == from ? to : names_[i];
      strides[i] = out.stride_of(out.axis_of(name));
    }
    std::vector<int> state(names_.size(), 0);
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
      std::size_t out_idx = 0;
      for (std::size_t i = 0; i < names_.size(); ++i) {
        out_idx += strides[i] * static_cast<std::size_t>(state[i]);
      }
      out.values_[out_idx] = values_[idx];
      advance(state);
    }
    return out;
  }

  double max_abs_diff(const Table& other) const {
    if (names_ != other.names_ || cards_ != other.cards_) {
      throw EvaluationError("table shape mismatch in comparison");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      m = std::max(m, std::abs(values_[i] - other.values_[i]));
    }
    return m;
  }

  // Advances a mixed-radix state tuple in lexicographic order.
  void advance(std::vector<int>& state) const {
    for (std::size_t i = state.size(); i-- > 0;) {
      if (++state[i] < cards_[i]) return;
      state[i] = 0;
    }
  }

 private:
  std::size_t axis_of(const std::string& name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) {
      throw EvaluationError("table has no variable '" + name + "'");
    }
    return static_cast<std::size_t>(it - names_.begin());
  }

  std::size_t stride_of(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t i = names_.size(); i-- > axis + 1;) {
      s *= static_cast<std::size_t>(cards_[i]);
    }
    return s;
  }

  // Stride of each of this table's axes inside `out`'s index space (0 for
  // axes that out lacks).
  std::vector<std::size_t> strides_into(const Table& out) const {
    std::vector<std::size_t> strides(names_.size(), 0);
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (out.has_variable(names_[i])) {
        strides[i] = out.stride_of(out.axis_of(names_[i]));
      }
    }
    return strides;
  }

  static Table combine(const Table& a, const Table& b, bool divide) {
    std::vector<std::pair<std::string, int>> vars;
    for (std::size_t i = 0; i < a.names_.size(); ++i) {
      vars.push_back({a.names_[i], a.cards_[i]});
    }
    for (std::size_t i = 0; i < b.names_.size(); ++i) {
      if (a.has_variable(b.names_[i])) {
        if (a.cards_[a.axis_of(b.names_[i])] != b.cards_[i]) {
          throw EvaluationError("cardinality mismatch on '" + b.names_[i] +
                                "'");
        }
      } else {
        vars.push_back({b.names_[i], b.cards_[i]});
      }
    }
    Table out(vars, 0.0);
    const std::vector<std::size_t> a_strides = out.strides_onto(a);
    const std::vector<std::size_t> b_strides = out.strides_onto(b);
    std::vector<int> state(out.names_.size(), 0);
    for (std::size_t idx = 0; idx < out.values_.size(); ++idx) {
      std::size_t ai = 0;
      std::size_t bi = 0;
      for (std::size_t i = 0; i < out.names_.size(); ++i) {
        ai += a_strides[i] * static_cast<std::size_t>(state[i]);
        bi += b_strides[i] * static_cast<std::size_t>(state[i]);
      }
      const double x = a.values_[ai];
      const double y = b.values_[bi];
      if (!divide) {
        out.values_[idx] = x * y;
      } else if (y != 0.0) {
        out.values_[idx] = x / y;
      } else if (x == 0.0) {
        out.values_[idx] = 0.0;  // structurally empty row
      } else {
        throw EvaluationError("division by zero probability");
      }
      out.advance(state);
    }
    return out;
  }

  // Stride of each of `out`'s axes inside `other`'s index space.
  std::vector<std::size_t> strides_onto(const Table& other) const {
    std::vector<std::size_t> strides(names_.size(), 0);
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (other.has_variable(names_[i])) {
        strides[i] = other.stride_of(other.axis_of(names_[i]));
      }
    }
    return strides;
  }

  std::vector<std::string> names_;
  std::vector<int> cards_;
  std::vector<double> values_;
};

}  // namespace sgid
