#pragma once

// Sensitivity harness over typed edits. Generation applies a sentence's edits
// in a seeded random order, recording every intermediate version; scoring
// takes one parse per version and averages the change in USim caused by each
// edit, grouped by edit type.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "usim/corpus.hpp"
#include "usim/error.hpp"
#include "usim/graph.hpp"
#include "usim/measures.hpp"

namespace usim {

struct EditOperation {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  std::vector<std::string> replacement;
  std::string type;

  std::ptrdiff_t length_delta() const {
    return static_cast<std::ptrdiff_t>(replacement.size()) - static_cast<std::ptrdiff_t>(end - start);
  }

  friend bool operator==(const EditOperation&, const EditOperation&) = default;
};

inline std::vector<std::string> apply_edit(const std::vector<std::string>& tokens, const EditOperation& edit) {
  if (edit.start > edit.end || edit.end > tokens.size())
    throw PreconditionError(fmt::format("edit span [{}, {}) does not fit a sentence of {} tokens", edit.start, edit.end,
                                        tokens.size()));
  std::vector<std::string> out;
  out.reserve(tokens.size() + edit.replacement.size());
  out.insert(out.end(), tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(edit.start));
  out.insert(out.end(), edit.replacement.begin(), edit.replacement.end());
  out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(edit.end), tokens.end());
  return out;
}

// a lies entirely at or before b's start. An insertion at position p comes
// before a non-empty span starting at p; two insertions at p are unordered.
inline bool precedes(const EditOperation& a, const EditOperation& b) {
  if (a.end != b.start) return a.end < b.start;
  return a.start < a.end || b.start < b.end;
}

inline bool conflicts(const EditOperation& a, const EditOperation& b) { return !precedes(a, b) && !precedes(b, a); }

inline void check_edits(const std::vector<EditOperation>& edits, std::size_t sentence_length) {
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const auto& e = edits[i];
    if (e.start > e.end || e.end > sentence_length)
      throw PreconditionError(fmt::format("edit #{} span [{}, {}) does not fit a sentence of {} tokens", i, e.start,
                                          e.end, sentence_length));
    for (std::size_t j = 0; j < i; ++j)
      if (conflicts(edits[j], e)) throw PreconditionError(fmt::format("edits #{} and #{} overlap", j, i));
  }
}

// Mixes a master seed with a sentence id so chains draw from independent,
// platform-stable streams.
inline std::uint64_t chain_seed(std::uint64_t master, std::string_view sentence_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : sentence_id) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = master ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// std::uniform_int_distribution and std::shuffle are implementation-defined;
// these draws are not, so chains are reproducible across standard libraries.
class ChainRng {
 public:
  explicit ChainRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % bound;
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[below(i)]);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

struct VersionChain {
  std::string sentence_id;
  std::uint64_t seed = 0;
  std::vector<EditOperation> edits;
  std::vector<std::size_t> order;
  std::vector<std::vector<std::string>> versions;
  std::size_t source_index = 0;

  std::string version_id(std::size_t k) const { return fmt::format("{}.v{}", sentence_id, k); }

  friend bool operator==(const VersionChain&, const VersionChain&) = default;
};

// Applies edits in `order`, shifting each pending span by the length deltas
// of applied edits that precede it. Returns every version, original first.
inline std::vector<std::vector<std::string>> replay(const std::vector<std::string>& tokens,
                                                    const std::vector<EditOperation>& edits,
                                                    const std::vector<std::size_t>& order) {
  std::vector<std::vector<std::string>> versions{tokens};
  std::vector<char> applied(edits.size(), 0);
  for (std::size_t idx : order) {
    if (idx >= edits.size() || applied[idx]) throw PreconditionError("edit order is not a permutation");
    EditOperation shifted = edits[idx];
    std::ptrdiff_t shift = 0;
    for (std::size_t j = 0; j < edits.size(); ++j)
      if (applied[j] && precedes(edits[j], edits[idx])) shift += edits[j].length_delta();
    shifted.start = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(shifted.start) + shift);
    shifted.end = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(shifted.end) + shift);
    versions.push_back(apply_edit(versions.back(), shifted));
    applied[idx] = 1;
  }
  return versions;
}

inline VersionChain build_chain(std::string sentence_id, const std::vector<std::string>& tokens,
                                std::vector<EditOperation> edits, std::uint64_t seed,
                                std::optional<std::size_t> pinned_source = std::nullopt) {
  check_edits(edits, tokens.size());
  VersionChain chain;
  chain.sentence_id = std::move(sentence_id);
  chain.seed = seed;
  ChainRng rng(seed);
  chain.order = rng.permutation(edits.size());
  chain.versions = replay(tokens, edits, chain.order);
  chain.edits = std::move(edits);
  const std::size_t picked = static_cast<std::size_t>(rng.below(chain.versions.size()));
  if (pinned_source) {
    if (*pinned_source >= chain.versions.size())
      throw PreconditionError(fmt::format("source index {} exceeds the {} versions of '{}'", *pinned_source,
                                          chain.versions.size(), chain.sentence_id));
    chain.source_index = *pinned_source;
  } else {
    chain.source_index = picked;
  }
  return chain;
}

struct EditRecord {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<EditOperation> edits;
};

inline nlohmann::ordered_json edit_to_json(const EditOperation& e) {
  nlohmann::ordered_json j;
  j["start"] = e.start;
  j["end"] = e.end;
  j["replacement"] = e.replacement;
  j["type"] = e.type;
  return j;
}

inline EditOperation edit_from_json(const nlohmann::json& j, const std::string& where) {
  try {
    EditOperation e;
    e.start = j.at("start").get<std::size_t>();
    e.end = j.at("end").get<std::size_t>();
    e.replacement = j.at("replacement").get<std::vector<std::string>>();
    e.type = j.at("type").get<std::string>();
    if (e.type.empty()) throw FormatError(fmt::format("{}: empty edit type", where));
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(fmt::format("{}: {}", where, ex.what()));
  }
}

// One record per line: {"sentence_id", "tokens", "edits": [{start, end, replacement, type}]}.
inline std::vector<EditRecord> parse_edit_corpus(std::string_view text, const std::string& source = "<edits>") {
  std::vector<EditRecord> out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      const auto where = fmt::format("{}:{}", source, line_no);
      try {
        const auto j = nlohmann::json::parse(line.begin(), line.end());
        EditRecord r;
        r.sentence_id = j.at("sentence_id").get<std::string>();
        r.tokens = j.at("tokens").get<std::vector<std::string>>();
        const auto& je = j.at("edits");
        if (!je.is_array()) throw FormatError(fmt::format("{}: field 'edits' must be an array", where));
        for (std::size_t k = 0; k < je.size(); ++k)
          r.edits.push_back(edit_from_json(je[k], fmt::format("{}: edits[{}]", where, k)));
        if (r.sentence_id.empty() || r.sentence_id.find_first_of("/\\") != std::string::npos)
          throw FormatError(fmt::format("{}: sentence_id must be non-empty and free of path separators", where));
        out.push_back(std::move(r));
      } catch (const nlohmann::json::exception& ex) {
        throw FormatError(fmt::format("{}: {}", where, ex.what()));
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

inline std::vector<VersionChain> generate_chains(const std::vector<EditRecord>& records, std::uint64_t master_seed,
                                                 std::optional<std::size_t> pinned_source = std::nullopt) {
  std::vector<VersionChain> chains;
  chains.reserve(records.size());
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.sentence_id).second)
      throw PairingError(fmt::format("duplicate sentence_id '{}' in edit corpus", r.sentence_id));
    chains.push_back(build_chain(r.sentence_id, r.tokens, r.edits, chain_seed(master_seed, r.sentence_id), pinned_source));
  }
  return chains;
}

inline nlohmann::ordered_json manifest_to_json(const std::vector<VersionChain>& chains) {
  nlohmann::ordered_json doc;
  doc["format"] = "usim-maege-manifest";
  doc["format_version"] = 1;
  auto& versions = doc["versions"] = nlohmann::ordered_json::array();
  auto& jchains = doc["chains"] = nlohmann::ordered_json::array();
  for (const auto& c : chains) {
    nlohmann::ordered_json jc;
    jc["sentence_id"] = c.sentence_id;
    jc["seed"] = c.seed;
    jc["order"] = c.order;
    jc["source_index"] = c.source_index;
    auto& ids = jc["version_ids"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < c.versions.size(); ++k) {
      nlohmann::ordered_json jv;
      jv["version_id"] = c.version_id(k);
      jv["tokens"] = c.versions[k];
      versions.push_back(std::move(jv));
      ids.push_back(c.version_id(k));
    }
    auto& je = jc["edits"] = nlohmann::ordered_json::array();
    for (const auto& e : c.edits) je.push_back(edit_to_json(e));
    jchains.push_back(std::move(jc));
  }
  return doc;
}

inline std::string emit_manifest(const std::vector<VersionChain>& chains) { return manifest_to_json(chains).dump(1) + "\n"; }

// Rebuilds chains from a manifest, checking that replaying each recorded
// order reproduces the recorded versions.
inline std::vector<VersionChain> parse_manifest(std::string_view text, const std::string& source = "<manifest>") {
  std::vector<VersionChain> out;
  try {
    const auto doc = nlohmann::json::parse(text.begin(), text.end());
    if (doc.value("format", std::string()) != "usim-maege-manifest")
      throw FormatError(fmt::format("{}: not a manifest document", source));
    std::map<std::string, std::vector<std::string>> versions;
    for (const auto& jv : doc.at("versions"))
      versions[jv.at("version_id").get<std::string>()] = jv.at("tokens").get<std::vector<std::string>>();
    const auto& jchains = doc.at("chains");
    for (std::size_t ci = 0; ci < jchains.size(); ++ci) {
      const auto& jc = jchains[ci];
      const auto where = fmt::format("{}: chains[{}]", source, ci);
      VersionChain c;
      c.sentence_id = jc.at("sentence_id").get<std::string>();
      c.seed = jc.at("seed").get<std::uint64_t>();
      c.order = jc.at("order").get<std::vector<std::size_t>>();
      c.source_index = jc.at("source_index").get<std::size_t>();
      const auto& je = jc.at("edits");
      for (std::size_t k = 0; k < je.size(); ++k) c.edits.push_back(edit_from_json(je[k], fmt::format("{}.edits[{}]", where, k)));
      const auto ids = jc.at("version_ids").get<std::vector<std::string>>();
      if (ids.size() != c.edits.size() + 1 || c.order.size() != c.edits.size())
        throw FormatError(fmt::format("{}: version, order and edit counts disagree", where));
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k] != c.version_id(k)) throw FormatError(fmt::format("{}: unexpected version id '{}'", where, ids[k]));
        auto it = versions.find(ids[k]);
        if (it == versions.end()) throw FormatError(fmt::format("{}: version '{}' is not listed", where, ids[k]));
        c.versions.push_back(it->second);
      }
      if (c.source_index >= c.versions.size()) throw FormatError(fmt::format("{}: source_index out of range", where));
      check_edits(c.edits, c.versions.front().size());
      if (replay(c.versions.front(), c.edits, c.order) != c.versions)
        throw FormatError(fmt::format("{}: replaying the recorded order does not reproduce the versions", where));
      out.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(fmt::format("{}: {}", source, ex.what()));
  } catch (const PreconditionError& ex) {
    throw FormatError(fmt::format("{}: {}", source, ex.what()));
  }
  return out;
}

struct EditDelta {
  std::string sentence_id;
  std::size_t step = 0;  // transition versions[step - 1] -> versions[step]
  std::string type;
  double delta = 0.0;
};

struct TypeDelta {
  std::string type;
  double delta_mean = 0.0;
  std::size_t occurrences = 0;
};

struct TypeDeltaReport {
  std::vector<TypeDelta> types;  // by delta_mean descending, then type
  std::vector<EditDelta> edits;  // chain order, then step
};

// Groups per-edit deltas by type; each type's mean is the plain average of
// its deltas.
inline TypeDeltaReport aggregate_deltas(std::vector<EditDelta> edits) {
  TypeDeltaReport report;
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& d : edits) {
    auto& [sum, n] = acc[d.type];
    sum += d.delta;
    ++n;
  }
  for (const auto& [type, sn] : acc)
    report.types.push_back(TypeDelta{type, sn.first / static_cast<double>(sn.second), sn.second});
  std::stable_sort(report.types.begin(), report.types.end(),
                   [](const TypeDelta& a, const TypeDelta& b) { return a.delta_mean > b.delta_mean; });
  report.edits = std::move(edits);
  return report;
}

using GraphLookup = std::function<const SemanticGraph&(const std::string& version_id)>;

inline TypeDeltaReport compute_deltas(const std::vector<VersionChain>& chains, const GraphLookup& graph_of,
                                      const ScoringOptions& opts = {}, unsigned jobs = 1) {
  std::vector<std::vector<EditDelta>> per_chain(chains.size());
  parallel_for(chains.size(), jobs, [&](std::size_t ci) {
    const auto& c = chains[ci];
    const SemanticGraph& source = graph_of(c.version_id(c.source_index));
    std::vector<double> score(c.versions.size());
    for (std::size_t k = 0; k < c.versions.size(); ++k)
      score[k] = to_double(usim(source, graph_of(c.version_id(k)), opts).average);
    for (std::size_t k = 1; k < c.versions.size(); ++k)
      per_chain[ci].push_back(EditDelta{c.sentence_id, k, c.edits[c.order[k - 1]].type, score[k] - score[k - 1]});
  });

  std::vector<EditDelta> all;
  for (auto& deltas : per_chain)
    for (auto& d : deltas) all.push_back(std::move(d));
  return aggregate_deltas(std::move(all));
}

// Only version ids are checked; callers resolve them to graph files.
inline std::vector<std::string> missing_versions(const std::vector<VersionChain>& chains,
                                                 const std::function<bool(const std::string&)>& has_graph) {
  std::vector<std::string> missing;
  for (const auto& c : chains)
    for (std::size_t k = 0; k < c.versions.size(); ++k)
      if (!has_graph(c.version_id(k))) missing.push_back(c.version_id(k));
  return missing;
}

}  // namespace usim
