#pragma once

// Token alignment by minimum total edit distance, and its extension to a node
// alignment through the yield-overlap weight
//
//   w(v, u) = |aligned token pairs between yield(v) and yield(u)| / |yield(u)|
//
// where v lives in the graph being aligned and u in the target graph.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "usim/assignment.hpp"
#include "usim/edit_distance.hpp"
#include "usim/error.hpp"
#include "usim/graph.hpp"
#include "usim/rational.hpp"

namespace usim {

enum class Direction {
  SourceToCorrection,  // source nodes are aligned onto correction nodes
  CorrectionToSource,
};

inline const char* to_string(Direction d) {
  return d == Direction::SourceToCorrection ? "s_to_c" : "c_to_s";
}

struct AlignOptions {
  bool lowercase = false;
  // Pairs whose edit distance divided by the longer token's length exceeds
  // this bound are never aligned.
  std::optional<double> max_norm_dist;
};

struct TokenPair {
  TokenIndex source = 0;
  TokenIndex correction = 0;
  std::size_t cost = 0;

  friend bool operator==(const TokenPair&, const TokenPair&) = default;
};

// Aligned-side token -> target-side token, one slot per aligned-side token.
using TokenMap = std::vector<std::optional<TokenIndex>>;

class LeafAlignment {
 public:
  LeafAlignment() = default;

  // Throws PreconditionError if an index repeats on either side.
  LeafAlignment(std::vector<TokenPair> pairs, std::size_t source_size, std::size_t correction_size)
      : pairs_(std::move(pairs)), s2c_(source_size), c2s_(correction_size) {
    std::sort(pairs_.begin(), pairs_.end(), [](const TokenPair& a, const TokenPair& b) {
      return a.source != b.source ? a.source < b.source : a.correction < b.correction;
    });
    for (const auto& p : pairs_) {
      if (p.source >= source_size || p.correction >= correction_size)
        throw PreconditionError("leaf alignment pair out of range");
      if (s2c_[p.source] || c2s_[p.correction]) throw PreconditionError("leaf alignment must be one-to-one");
      s2c_[p.source] = p.correction;
      c2s_[p.correction] = p.source;
    }
  }

  const std::vector<TokenPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  std::size_t total_cost() const {
    std::size_t t = 0;
    for (const auto& p : pairs_) t += p.cost;
    return t;
  }

  const TokenMap& source_to_correction() const { return s2c_; }
  const TokenMap& correction_to_source() const { return c2s_; }
  const TokenMap& oriented(Direction d) const { return d == Direction::SourceToCorrection ? s2c_ : c2s_; }

  friend bool operator==(const LeafAlignment& a, const LeafAlignment& b) { return a.pairs_ == b.pairs_; }

 private:
  std::vector<TokenPair> pairs_;
  TokenMap s2c_;
  TokenMap c2s_;
};

// Minimum total edit distance; the longer side's surplus stays unaligned.
// Ties go to the smaller total |i - j|, then to the lexicographically
// smallest pair list.
inline LeafAlignment align_leaves(const std::vector<std::string>& source, const std::vector<std::string>& correction,
                                  const AlignOptions& opts = {}) {
  const std::size_t m = source.size();
  const std::size_t k = correction.size();
  if (m == 0 || k == 0) return LeafAlignment({}, m, k);

  std::vector<std::string> s = source, c = correction;
  if (opts.lowercase) {
    for (auto& t : s) t = ascii_lower(t);
    for (auto& t : c) t = ascii_lower(t);
  }

  const std::size_t n = std::max(m, k);
  // Sum of |i - j| over any assignment is below n * n, so scaling the edit
  // distance by n * n + 1 makes it the primary key.
  const auto scale = static_cast<std::int64_t>(n * n + 1);
  std::vector<std::vector<std::size_t>> dist(m, std::vector<std::size_t>(k));
  CostMatrix cost(m, k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      dist[i][j] = edit_distance(s[i], c[j]);
      if (opts.max_norm_dist) {
        const auto longest = std::max(code_point_length(s[i]), code_point_length(c[j]));
        const double norm = longest == 0 ? 0.0 : static_cast<double>(dist[i][j]) / static_cast<double>(longest);
        if (norm > *opts.max_norm_dist) {
          cost.at(i, j) = CostMatrix::kForbidden;
          continue;
        }
      }
      const auto offset = static_cast<std::int64_t>(i > j ? i - j : j - i);
      cost.at(i, j) = static_cast<std::int64_t>(dist[i][j]) * scale + offset;
    }

  const auto result = solve_assignment(cost);
  std::vector<TokenPair> pairs;
  for (std::size_t i = 0; i < m; ++i)
    if (const auto j = result.row_to_col[i]) pairs.push_back(TokenPair{i, *j, dist[i][*j]});
  return LeafAlignment(std::move(pairs), m, k);
}

namespace detail {

// Target-side tokens reached from yield(v) through the token map; sorted.
inline TokenSet image_of(const TokenSet& yield, const TokenMap& map) {
  TokenSet out;
  for (auto t : yield)
    if (t < map.size() && map[t]) out.push_back(*map[t]);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::size_t intersection_size(const TokenSet& a, const TokenSet& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace detail

// w(v, u) for v in `aligned`, u in `target`; map sends aligned tokens to
// target tokens. Empty target yields weigh 0.
inline Rational node_weight(const SemanticGraph& aligned, NodeIndex v, const SemanticGraph& target, NodeIndex u,
                            const TokenMap& map) {
  const auto& yu = target.yield(u);
  if (yu.empty()) return Rational(0);
  const auto hits = detail::intersection_size(detail::image_of(aligned.yield(v), map), yu);
  return Rational(static_cast<std::int64_t>(hits), static_cast<std::int64_t>(yu.size()));
}

inline Rational node_weight(const SemanticGraph& aligned, const NodeId& v, const SemanticGraph& target,
                            const NodeId& u, const TokenMap& map) {
  return node_weight(aligned, aligned.index_of(v), target, target.index_of(u), map);
}

// Pairs of (source-graph node, correction-graph node), sorted and unique.
// This is the relation edge matching is keyed on.
using NodeRelation = std::vector<std::pair<NodeIndex, NodeIndex>>;

inline void normalize(NodeRelation& rel) {
  std::sort(rel.begin(), rel.end());
  rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
}

struct NodeAlignment {
  Direction direction = Direction::SourceToCorrection;
  // Indexed by aligned-side node.
  std::vector<std::optional<NodeIndex>> target;
  std::vector<Rational> weight;

  std::size_t mapped_count() const {
    return static_cast<std::size_t>(std::count_if(target.begin(), target.end(), [](const auto& t) { return t.has_value(); }));
  }

  NodeRelation relation() const {
    NodeRelation rel;
    for (NodeIndex v = 0; v < target.size(); ++v) {
      if (!target[v]) continue;
      if (direction == Direction::SourceToCorrection)
        rel.emplace_back(v, *target[v]);
      else
        rel.emplace_back(*target[v], v);
    }
    normalize(rel);
    return rel;
  }
};

// Maps every non-leaf node of the aligned graph to the target node of maximal
// positive weight; anchored leaves follow the token alignment, implicit leaves
// stay unmapped. Among maximal-weight candidates the winner has the largest
// number of aligned tokens in common, then the closest depth, then the closest
// declaration position, then the earliest declaration position.
inline NodeAlignment extend_alignment(const SemanticGraph& source, const SemanticGraph& correction,
                                      const LeafAlignment& leaves, Direction direction) {
  const bool forward = direction == Direction::SourceToCorrection;
  const SemanticGraph& aligned = forward ? source : correction;
  const SemanticGraph& target = forward ? correction : source;
  const TokenMap& map = leaves.oriented(direction);
  if (map.size() != aligned.token_count()) throw PreconditionError("leaf alignment does not fit the graphs");

  NodeAlignment out;
  out.direction = direction;
  out.target.assign(aligned.node_count(), std::nullopt);
  out.weight.assign(aligned.node_count(), Rational(0));

  const auto distance = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };

  for (NodeIndex v = 0; v < aligned.node_count(); ++v) {
    if (aligned.is_leaf(v)) {
      const auto& a = aligned.anchor(v);
      if (a && map[*a]) {
        out.target[v] = target.leaf_of_token(*map[*a]);
        out.weight[v] = Rational(1);
      }
      continue;
    }
    const TokenSet image = detail::image_of(aligned.yield(v), map);
    if (image.empty()) continue;

    std::optional<NodeIndex> best;
    Rational best_w(0);
    std::size_t best_hits = 0;
    for (NodeIndex u = 0; u < target.node_count(); ++u) {
      const auto& yu = target.yield(u);
      if (yu.empty()) continue;
      const std::size_t hits = detail::intersection_size(image, yu);
      if (hits == 0) continue;
      const Rational w(static_cast<std::int64_t>(hits), static_cast<std::int64_t>(yu.size()));
      bool better = !best || w > best_w;
      if (best && w == best_w) {
        if (hits != best_hits) {
          better = hits > best_hits;
        } else {
          const auto dd = distance(target.depth(u), aligned.depth(v));
          const auto bd = distance(target.depth(*best), aligned.depth(v));
          if (dd != bd)
            better = dd < bd;
          else
            better = distance(u, v) < distance(*best, v);  // u > *best, so equal distance keeps *best
        }
      }
      if (better) {
        best = u;
        best_w = w;
        best_hits = hits;
      }
    }
    if (best) {
      out.target[v] = best;
      out.weight[v] = best_w;
    }
  }
  return out;
}

// Diagnostic dump: leaf pairs with costs, node pairs with weights per direction.
inline nlohmann::ordered_json alignment_dump(const SemanticGraph& source, const SemanticGraph& correction,
                                             const LeafAlignment& leaves) {
  nlohmann::ordered_json doc;
  doc["source_id"] = source.id();
  doc["correction_id"] = correction.id();
  auto& lp = doc["leaf_pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : leaves.pairs()) {
    nlohmann::ordered_json j;
    j["source"] = p.source;
    j["correction"] = p.correction;
    j["source_text"] = source.tokens()[p.source].text;
    j["correction_text"] = correction.tokens()[p.correction].text;
    j["cost"] = p.cost;
    lp.push_back(std::move(j));
  }
  doc["total_cost"] = leaves.total_cost();
  for (auto d : {Direction::SourceToCorrection, Direction::CorrectionToSource}) {
    const auto na = extend_alignment(source, correction, leaves, d);
    const SemanticGraph& aligned = d == Direction::SourceToCorrection ? source : correction;
    const SemanticGraph& target = d == Direction::SourceToCorrection ? correction : source;
    auto& arr = doc[std::string("node_pairs_") + to_string(d)] = nlohmann::ordered_json::array();
    for (NodeIndex v = 0; v < na.target.size(); ++v) {
      if (!na.target[v]) continue;
      nlohmann::ordered_json j;
      j["from"] = aligned.node_id(v);
      j["to"] = target.node_id(*na.target[v]);
      j["weight"] = to_fraction(na.weight[v]);
      arr.push_back(std::move(j));
    }
  }
  return doc;
}

}  // namespace usim
