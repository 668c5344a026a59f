#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "revcausal/errors.hpp"

namespace revcausal {

/// Directed acyclic graph over named variables.
///
/// Nodes keep their declared order, which fixes all matrix layouts downstream;
/// acyclicity is verified at construction, so a topological order always
/// exists and is computed once. Immutable after construction.
class Dag {
public:
  using Edge = std::pair<std::string, std::string>;  // (cause, effect)

  Dag(std::vector<std::string> nodes, const std::vector<Edge>& edges)
      : nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      for (std::size_t j = i + 1; j < nodes_.size(); ++j) {
        if (nodes_[i] == nodes_[j]) {
          throw ValidationError("nodes", "duplicate node name: " + nodes_[i]);
        }
      }
    }
    parent_index_.resize(nodes_.size());
    for (const Edge& e : edges) {
      const std::size_t cause = index_of(e.first);
      const std::size_t effect = index_of(e.second);
      if (has_edge(e.first, e.second)) continue;  // ignore duplicates
      edges_.push_back(e);
      parent_index_[effect].push_back(cause);
    }
    for (auto& ps : parent_index_) std::sort(ps.begin(), ps.end());
    topo_ = compute_topological_order();
  }

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool has_node(const std::string& name) const {
    return std::find(nodes_.begin(), nodes_.end(), name) != nodes_.end();
  }

  bool has_edge(const std::string& cause, const std::string& effect) const {
    return std::find(edges_.begin(), edges_.end(), Edge{cause, effect}) != edges_.end();
  }

  std::size_t index_of(const std::string& name) const {
    auto it = std::find(nodes_.begin(), nodes_.end(), name);
    if (it == nodes_.end()) throw UnknownNodeError("unknown node: " + name);
    return static_cast<std::size_t>(it - nodes_.begin());
  }

  /// Parents of `node`, in declared node order.
  std::vector<std::string> parents(const std::string& node) const {
    const std::size_t i = index_of(node);
    std::vector<std::string> out;
    out.reserve(parent_index_[i].size());
    for (std::size_t p : parent_index_[i]) out.push_back(nodes_[p]);
    return out;
  }

  /// Every edge goes forward in this order; ties broken by declared order.
  const std::vector<std::string>& topological_order() const noexcept { return topo_; }

  /// One line per node (declaration, preserves order), then one line per edge
  /// as `cause -> effect`.
  std::string to_edge_list() const {
    std::ostringstream out;
    for (const auto& n : nodes_) out << n << '\n';
    for (const auto& e : edges_) out << e.first << " -> " << e.second << '\n';
    return out.str();
  }

  /// Parses the format written by to_edge_list(). Bare lines declare nodes;
  /// `cause -> effect` lines declare edges, auto-declaring unseen endpoints in
  /// first-mention order. `#` starts a comment.
  static Dag from_edge_list(const std::string& text) {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    auto declare = [&](const std::string& name) {
      if (std::find(nodes.begin(), nodes.end(), name) == nodes.end()) nodes.push_back(name);
    };
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (auto arrow = line.find("->"); arrow != std::string::npos) {
        const std::string cause = trim(line.substr(0, arrow));
        const std::string effect = trim(line.substr(arrow + 2));
        if (cause.empty() || effect.empty()) {
          throw ValidationError("dag", "malformed edge line: " + line);
        }
        declare(cause);
        declare(effect);
        edges.emplace_back(cause, effect);
      } else {
        declare(line);
      }
    }
    return Dag(std::move(nodes), edges);
  }

  friend bool operator==(const Dag& a, const Dag& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  }

  std::vector<std::string> compute_topological_order() const {
    const std::size_t n = nodes_.size();
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t i = 0; i < n; ++i) indegree[i] = parent_index_[i].size();
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p : parent_index_[i]) children[p].push_back(i);
    }
    std::set<std::size_t> ready;  // smallest declared index first
    for (std::size_t i = 0; i < n; ++i) {
      if (indegree[i] == 0) ready.insert(i);
    }
    std::vector<std::string> order;
    order.reserve(n);
    while (!ready.empty()) {
      const std::size_t i = *ready.begin();
      ready.erase(ready.begin());
      order.push_back(nodes_[i]);
      for (std::size_t c : children[i]) {
        if (--indegree[c] == 0) ready.insert(c);
      }
    }
    if (order.size() != n) throw CycleError("edges contain a directed cycle");
    return order;
  }

  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;  // deduplicated, first-seen order
  std::vector<std::vector<std::size_t>> parent_index_;
  std::vector<std::string> topo_;
};

}  // namespace revcausal
