#pragma once

// Semantic graph data model: a rooted, labeled DAG whose anchored leaves are
// in bijection with the sentence tokens. Graphs validate on construction and
// are immutable afterwards, so every query below is a pure read.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "usim/error.hpp"

namespace usim {

using NodeId = std::string;
using TokenIndex = std::size_t;
using NodeIndex = std::size_t;
using TokenSet = std::vector<TokenIndex>;  // sorted, unique

struct Token {
  TokenIndex index = 0;
  std::string text;
};

struct Node {
  NodeId id;
  std::optional<TokenIndex> anchor;  // set only on leaves that carry a token

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  NodeId parent;
  NodeId child;
  std::vector<std::string> labels;
  bool remote = false;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// One label of one edge. All counting and matching is done on instances.
struct EdgeInstance {
  NodeIndex parent = 0;
  NodeIndex child = 0;
  std::string label;
  bool remote = false;
};

class SemanticGraph {
 public:
  SemanticGraph(std::string id, std::vector<std::string> tokens, std::vector<Node> nodes,
                std::vector<Edge> edges, NodeId root)
      : id_(std::move(id)), nodes_(std::move(nodes)), edges_(std::move(edges)), root_id_(std::move(root)) {
    tokens_.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) tokens_.push_back(Token{i, std::move(tokens[i])});
    validate();
  }

  const std::string& id() const { return id_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t token_count() const { return tokens_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const NodeId& root() const { return root_id_; }
  NodeIndex root_index() const { return root_; }

  std::vector<std::string> token_texts() const {
    std::vector<std::string> out;
    out.reserve(tokens_.size());
    for (const auto& t : tokens_) out.push_back(t.text);
    return out;
  }

  bool contains(const NodeId& v) const { return index_.count(v) != 0; }

  NodeIndex index_of(const NodeId& v) const {
    auto it = index_.find(v);
    if (it == index_.end()) throw LookupError(fmt::format("graph '{}': unknown node '{}'", id_, v));
    return it->second;
  }

  const NodeId& node_id(NodeIndex i) const { return nodes_.at(i).id; }

  bool is_leaf(NodeIndex i) const { return out_edges_.at(i).empty(); }
  const std::optional<TokenIndex>& anchor(NodeIndex i) const { return nodes_.at(i).anchor; }
  NodeIndex leaf_of_token(TokenIndex t) const { return leaf_of_token_.at(t); }

  // Indices into edges().
  const std::vector<std::size_t>& out_edges(NodeIndex i) const { return out_edges_.at(i); }
  const std::vector<std::size_t>& in_edges(NodeIndex i) const { return in_edges_.at(i); }

  // Token indices anchored by the leaf descendants of a node (the node itself
  // included when it is an anchored leaf). Implicit leaves contribute nothing.
  const TokenSet& yield(NodeIndex i) const { return yields_.at(i); }
  const TokenSet& yield_of(const NodeId& v) const { return yields_[index_of(v)]; }

  // Length of the shortest directed path from the root.
  std::size_t depth(NodeIndex i) const { return depth_.at(i); }

  // Expands multi-label edges, ordered by (parent id, child id, label).
  std::vector<EdgeInstance> edge_instances(bool include_remote = true) const {
    std::vector<EdgeInstance> out;
    for (const auto& e : edges_) {
      if (e.remote && !include_remote) continue;
      const NodeIndex p = index_.at(e.parent);
      const NodeIndex c = index_.at(e.child);
      for (const auto& l : e.labels) out.push_back(EdgeInstance{p, c, l, e.remote});
    }
    std::sort(out.begin(), out.end(), [this](const EdgeInstance& a, const EdgeInstance& b) {
      const auto& ap = nodes_[a.parent].id;
      const auto& bp = nodes_[b.parent].id;
      if (ap != bp) return ap < bp;
      const auto& ac = nodes_[a.child].id;
      const auto& bc = nodes_[b.child].id;
      if (ac != bc) return ac < bc;
      return a.label < b.label;
    });
    return out;
  }

  friend bool operator==(const SemanticGraph& a, const SemanticGraph& b) {
    return a.id_ == b.id_ && a.token_texts() == b.token_texts() && a.nodes_ == b.nodes_ &&
           a.edges_ == b.edges_ && a.root_id_ == b.root_id_;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(fmt::format("graph '{}': {}", id_, what));
  }

  void validate() {
    for (const auto& t : tokens_)
      if (t.text.empty()) fail(fmt::format("token {} is empty", t.index));

    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      if (n.id.empty()) fail(fmt::format("node #{} has an empty id", i));
      if (!index_.emplace(n.id, i).second) fail(fmt::format("duplicate node id '{}'", n.id));
    }

    auto root_it = index_.find(root_id_);
    if (root_it == index_.end()) fail(fmt::format("root '{}' is not a declared node", root_id_));
    root_ = root_it->second;

    constexpr auto kUnset = static_cast<NodeIndex>(-1);
    leaf_of_token_.assign(tokens_.size(), kUnset);
    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
      const auto& a = nodes_[i].anchor;
      if (!a) continue;
      if (*a >= tokens_.size())
        fail(fmt::format("node '{}' anchors token {} but the sentence has {} tokens", nodes_[i].id, *a,
                         tokens_.size()));
      if (leaf_of_token_[*a] != kUnset)
        fail(fmt::format("token {} is anchored by both '{}' and '{}'", *a, nodes_[leaf_of_token_[*a]].id,
                         nodes_[i].id));
      leaf_of_token_[*a] = i;
    }
    for (TokenIndex t = 0; t < tokens_.size(); ++t)
      if (leaf_of_token_[t] == kUnset) fail(fmt::format("token {} ('{}') has no anchoring leaf", t, tokens_[t].text));

    out_edges_.assign(nodes_.size(), {});
    in_edges_.assign(nodes_.size(), {});
    std::set<std::pair<NodeIndex, NodeIndex>> seen;
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const auto& e = edges_[k];
      const auto where = [&] { return fmt::format("edge #{} ('{}' -> '{}')", k, e.parent, e.child); };
      auto p = index_.find(e.parent);
      auto c = index_.find(e.child);
      if (p == index_.end()) fail(fmt::format("{}: unknown parent node", where()));
      if (c == index_.end()) fail(fmt::format("{}: unknown child node", where()));
      if (p->second == c->second) fail(fmt::format("{}: self-loop", where()));
      if (e.labels.empty()) fail(fmt::format("{}: no labels", where()));
      std::set<std::string> uniq;
      for (const auto& l : e.labels) {
        if (l.empty()) fail(fmt::format("{}: empty label", where()));
        if (!uniq.insert(l).second) fail(fmt::format("{}: duplicate label '{}'", where(), l));
      }
      if (!seen.emplace(p->second, c->second).second)
        fail(fmt::format("{}: duplicate edge between the same nodes", where()));
      if (nodes_[p->second].anchor) fail(fmt::format("{}: anchored node '{}' cannot have children", where(), e.parent));
      out_edges_[p->second].push_back(k);
      in_edges_[c->second].push_back(k);
    }

    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
      if (i == root_ && !in_edges_[i].empty()) fail(fmt::format("root '{}' has an incoming edge", root_id_));
      if (i != root_ && in_edges_[i].empty()) fail(fmt::format("node '{}' has no incoming edge", nodes_[i].id));
    }

    // Kahn's algorithm; leftover nodes sit on a cycle.
    std::vector<std::size_t> indegree(nodes_.size());
    for (NodeIndex i = 0; i < nodes_.size(); ++i) indegree[i] = in_edges_[i].size();
    std::vector<NodeIndex> order;
    order.reserve(nodes_.size());
    for (NodeIndex i = 0; i < nodes_.size(); ++i)
      if (indegree[i] == 0) order.push_back(i);
    for (std::size_t head = 0; head < order.size(); ++head)
      for (auto k : out_edges_[order[head]]) {
        const NodeIndex c = index_.at(edges_[k].child);
        if (--indegree[c] == 0) order.push_back(c);
      }
    if (order.size() != nodes_.size()) {
      for (NodeIndex i = 0; i < nodes_.size(); ++i)
        if (indegree[i] != 0) fail(fmt::format("cycle through node '{}'", nodes_[i].id));
    }

    constexpr auto kUnreached = static_cast<std::size_t>(-1);
    depth_.assign(nodes_.size(), kUnreached);
    std::deque<NodeIndex> queue{root_};
    depth_[root_] = 0;
    while (!queue.empty()) {
      const NodeIndex v = queue.front();
      queue.pop_front();
      for (auto k : out_edges_[v]) {
        const NodeIndex c = index_.at(edges_[k].child);
        if (depth_[c] == kUnreached) {
          depth_[c] = depth_[v] + 1;
          queue.push_back(c);
        }
      }
    }
    for (NodeIndex i = 0; i < nodes_.size(); ++i)
      if (depth_[i] == kUnreached) fail(fmt::format("node '{}' is not reachable from the root", nodes_[i].id));

    yields_.assign(nodes_.size(), {});
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeIndex v = *it;
      TokenSet acc;
      if (nodes_[v].anchor) acc.push_back(*nodes_[v].anchor);
      for (auto k : out_edges_[v]) {
        const auto& cy = yields_[index_.at(edges_[k].child)];
        TokenSet merged;
        merged.reserve(acc.size() + cy.size());
        std::set_union(acc.begin(), acc.end(), cy.begin(), cy.end(), std::back_inserter(merged));
        acc = std::move(merged);
      }
      yields_[v] = std::move(acc);
    }
  }

  std::string id_;
  std::vector<Token> tokens_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  NodeId root_id_;

  NodeIndex root_ = 0;
  std::unordered_map<NodeId, NodeIndex> index_;
  std::vector<NodeIndex> leaf_of_token_;
  std::vector<std::vector<std::size_t>> out_edges_;
  std::vector<std::vector<std::size_t>> in_edges_;
  std::vector<TokenSet> yields_;
  std::vector<std::size_t> depth_;
};

}  // namespace usim
