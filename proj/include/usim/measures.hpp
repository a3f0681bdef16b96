#pragma once

// Graph-comparison measures: the shared-token DAG F-score, the directional
// alignment-based USim score and its two-direction average, and DistSim.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "usim/alignment.hpp"
#include "usim/error.hpp"
#include "usim/graph.hpp"
#include "usim/rational.hpp"

namespace usim {

struct ScoringOptions {
  AlignOptions align;
  bool include_remote = true;
  // Also require the parents of two matching edges to be aligned.
  bool strict_parent = false;
};

// Precision is measured on the candidate side, recall on the reference side.
struct ScoreTriple {
  Rational precision{0};
  Rational recall{0};
  Rational f_score{0};
  std::size_t candidate_matched = 0;
  std::size_t candidate_total = 0;
  std::size_t reference_matched = 0;
  std::size_t reference_total = 0;

  friend bool operator==(const ScoreTriple&, const ScoreTriple&) = default;
};

// Both sides empty scores 1; exactly one side empty scores 0.
inline ScoreTriple make_triple(std::size_t candidate_matched, std::size_t candidate_total,
                               std::size_t reference_matched, std::size_t reference_total) {
  ScoreTriple t;
  t.candidate_matched = candidate_matched;
  t.candidate_total = candidate_total;
  t.reference_matched = reference_matched;
  t.reference_total = reference_total;
  if (candidate_total == 0 && reference_total == 0) {
    t.precision = t.recall = t.f_score = Rational(1);
    return t;
  }
  if (candidate_total == 0 || reference_total == 0) return t;
  t.precision = Rational(static_cast<std::int64_t>(candidate_matched), static_cast<std::int64_t>(candidate_total));
  t.recall = Rational(static_cast<std::int64_t>(reference_matched), static_cast<std::int64_t>(reference_total));
  t.f_score = harmonic_mean(t.precision, t.recall);
  return t;
}

struct UsimReport {
  ScoreTriple s_to_c;
  ScoreTriple c_to_s;
  Rational average{0};

  friend bool operator==(const UsimReport&, const UsimReport&) = default;
};

// Edges of g1 and g2 match when their labels are equal and their children
// have equal yields. Precision counts matched g1 instances, recall matched g2
// instances.
inline ScoreTriple dag_fscore(const SemanticGraph& g1, const SemanticGraph& g2, bool include_remote = true) {
  if (g1.token_texts() != g2.token_texts())
    throw PreconditionError(fmt::format("dag_fscore: graphs '{}' and '{}' are over different tokens", g1.id(), g2.id()));
  const auto i1 = g1.edge_instances(include_remote);
  const auto i2 = g2.edge_instances(include_remote);

  using Key = std::pair<std::string, TokenSet>;
  const auto keys = [](const SemanticGraph& g, const std::vector<EdgeInstance>& inst) {
    std::set<Key> out;
    for (const auto& e : inst) out.emplace(e.label, g.yield(e.child));
    return out;
  };
  const auto k1 = keys(g1, i1);
  const auto k2 = keys(g2, i2);
  const auto count_in = [](const SemanticGraph& g, const std::vector<EdgeInstance>& inst, const std::set<Key>& other) {
    std::size_t n = 0;
    for (const auto& e : inst) n += other.count(Key(e.label, g.yield(e.child)));
    return n;
  };
  return make_triple(count_in(g1, i1, k2), i1.size(), count_in(g2, i2, k1), i2.size());
}

struct EdgeMatches {
  std::vector<EdgeInstance> source_instances;
  std::vector<EdgeInstance> correction_instances;
  // (index into source_instances, index into correction_instances)
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  // Recall is taken over the source side, precision over the correction side.
  ScoreTriple score() const {
    std::vector<char> s(source_instances.size(), 0), c(correction_instances.size(), 0);
    for (const auto& [i, j] : pairs) {
      s[i] = 1;
      c[j] = 1;
    }
    const auto ones = [](const std::vector<char>& v) {
      return static_cast<std::size_t>(std::count(v.begin(), v.end(), 1));
    };
    return make_triple(ones(c), c.size(), ones(s), s.size());
  }
};

// A source instance and a correction instance match when their labels are
// equal and their child nodes are related. Parents are unconstrained unless
// strict_parent is set.
inline EdgeMatches match_edges(const SemanticGraph& source, const SemanticGraph& correction,
                               const NodeRelation& relation, const ScoringOptions& opts = {}) {
  EdgeMatches out;
  out.source_instances = source.edge_instances(opts.include_remote);
  out.correction_instances = correction.edge_instances(opts.include_remote);

  std::map<std::pair<NodeIndex, std::string>, std::vector<std::size_t>> by_child_label;
  for (std::size_t j = 0; j < out.correction_instances.size(); ++j) {
    const auto& e = out.correction_instances[j];
    by_child_label[{e.child, e.label}].push_back(j);
  }
  std::unordered_map<NodeIndex, std::vector<NodeIndex>> partners;
  for (const auto& [s, c] : relation) partners[s].push_back(c);
  const std::set<std::pair<NodeIndex, NodeIndex>> related(relation.begin(), relation.end());

  for (std::size_t i = 0; i < out.source_instances.size(); ++i) {
    const auto& e = out.source_instances[i];
    auto p = partners.find(e.child);
    if (p == partners.end()) continue;
    for (NodeIndex c : p->second) {
      auto hit = by_child_label.find({c, e.label});
      if (hit == by_child_label.end()) continue;
      for (std::size_t j : hit->second) {
        if (opts.strict_parent && !related.count({e.parent, out.correction_instances[j].parent})) continue;
        out.pairs.emplace_back(i, j);
      }
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

// Every pair of nodes with equal yields. Injecting this relation into
// match_edges reproduces dag_fscore on shared-token graphs.
inline NodeRelation same_yield_relation(const SemanticGraph& source, const SemanticGraph& correction) {
  std::map<TokenSet, std::vector<NodeIndex>> by_yield;
  for (NodeIndex u = 0; u < correction.node_count(); ++u) by_yield[correction.yield(u)].push_back(u);
  NodeRelation rel;
  for (NodeIndex v = 0; v < source.node_count(); ++v) {
    auto it = by_yield.find(source.yield(v));
    if (it == by_yield.end()) continue;
    for (NodeIndex u : it->second) rel.emplace_back(v, u);
  }
  normalize(rel);
  return rel;
}

inline ScoreTriple usim_directed(const SemanticGraph& source, const SemanticGraph& correction,
                                 const LeafAlignment& leaves, Direction direction, const ScoringOptions& opts = {}) {
  const auto nodes = extend_alignment(source, correction, leaves, direction);
  return match_edges(source, correction, nodes.relation(), opts).score();
}

inline ScoreTriple usim_directed(const SemanticGraph& source, const SemanticGraph& correction, Direction direction,
                                 const ScoringOptions& opts = {}) {
  const auto leaves = align_leaves(source.token_texts(), correction.token_texts(), opts.align);
  return usim_directed(source, correction, leaves, direction, opts);
}

inline UsimReport usim(const SemanticGraph& source, const SemanticGraph& correction, const ScoringOptions& opts = {}) {
  const auto leaves = align_leaves(source.token_texts(), correction.token_texts(), opts.align);
  UsimReport r;
  r.s_to_c = usim_directed(source, correction, leaves, Direction::SourceToCorrection, opts);
  r.c_to_s = usim_directed(source, correction, leaves, Direction::CorrectionToSource, opts);
  r.average = (r.s_to_c.f_score + r.c_to_s.f_score) / 2;
  return r;
}

struct LabelGroup {
  std::string name;
  std::vector<std::string> labels;

  friend bool operator==(const LabelGroup&, const LabelGroup&) = default;
};

struct LabelDistSim {
  LabelGroup group;
  // (1/N) * sum_i |c_i - d_i|, a distance: 0 when every pair agrees.
  Rational value{0};
  // Not part of the measure: 1 - sum|c_i - d_i| / sum max(c_i, d_i), or 1 when
  // the group never occurs.
  Rational similarity{1};
};

inline std::size_t count_labels(const SemanticGraph& g, const LabelGroup& group, bool include_remote = true) {
  std::size_t n = 0;
  for (const auto& e : g.edge_instances(include_remote))
    n += std::find(group.labels.begin(), group.labels.end(), e.label) != group.labels.end();
  return n;
}

// Participants with Adverbials, and Scenes, followed by one group per
// distinct label observed on either side (in label order).
inline std::vector<LabelGroup> default_label_groups(std::span<const SemanticGraph> sources,
                                                    std::span<const SemanticGraph> corrections) {
  std::vector<LabelGroup> groups{{"A+D", {"A", "D"}}, {"Scene", {"H"}}};
  std::set<std::string> seen;
  for (auto side : {sources, corrections})
    for (const auto& g : side)
      for (const auto& e : g.edges())
        for (const auto& l : e.labels) seen.insert(l);
  for (const auto& l : seen) groups.push_back({l, {l}});
  return groups;
}

inline std::vector<LabelDistSim> distsim(std::span<const SemanticGraph> sources,
                                         std::span<const SemanticGraph> corrections,
                                         const std::vector<LabelGroup>& groups, bool include_remote = true) {
  if (sources.size() != corrections.size()) throw PreconditionError("distsim: sides differ in length");
  if (sources.empty()) throw PreconditionError("distsim: no sentence pairs");
  std::vector<LabelDistSim> out;
  out.reserve(groups.size());
  const auto n = static_cast<std::int64_t>(sources.size());
  for (const auto& group : groups) {
    std::int64_t diff = 0, mass = 0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const auto c = static_cast<std::int64_t>(count_labels(sources[i], group, include_remote));
      const auto d = static_cast<std::int64_t>(count_labels(corrections[i], group, include_remote));
      diff += c > d ? c - d : d - c;
      mass += std::max(c, d);
    }
    LabelDistSim r{group, Rational(diff, n), mass == 0 ? Rational(1) : Rational(1) - Rational(diff, mass)};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace usim
