#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "generators.hpp"
#include "graph_builder.hpp"
#include "usim/edit_harness.hpp"
#include "usim/graph_io.hpp"

namespace {

using usim::EditOperation;
using Tokens = std::vector<std::string>;

TEST(ApplyEdit, ReplaceDeleteInsert) {
  const Tokens t{"He", "gve", "an", "apple"};
  EXPECT_EQ(usim::apply_edit(t, {1, 2, {"gave"}, "Mec"}), (Tokens{"He", "gave", "an", "apple"}));
  EXPECT_EQ(usim::apply_edit(t, {2, 3, {}, "ArtOrDet"}), (Tokens{"He", "gve", "apple"}));
  EXPECT_EQ(usim::apply_edit(t, {2, 2, {"red"}, "Wci"}), (Tokens{"He", "gve", "red", "an", "apple"}));
  EXPECT_EQ(usim::apply_edit(t, {4, 4, {"."}, "Mec"}), (Tokens{"He", "gve", "an", "apple", "."}));
}

TEST(ApplyEdit, OutOfBounds) {
  const Tokens t{"a", "b"};
  EXPECT_THROW(usim::apply_edit(t, {1, 3, {}, "X"}), usim::PreconditionError);
  EXPECT_THROW(usim::apply_edit(t, {2, 1, {}, "X"}), usim::PreconditionError);
}

TEST(BuildChain, ZeroAndOneEdit) {
  const Tokens t{"a", "b", "c"};
  const auto none = usim::build_chain("s", t, {}, 99);
  ASSERT_EQ(none.versions.size(), 1u);
  EXPECT_EQ(none.source_index, 0u);
  for (std::uint64_t seed : {0ull, 1ull, 12345ull, ~0ull}) {
    const auto one = usim::build_chain("s", t, {{0, 1, {"A"}, "X"}}, seed);
    ASSERT_EQ(one.versions.size(), 2u);
    EXPECT_EQ(one.versions[1], (Tokens{"A", "b", "c"}));
  }
}

TEST(BuildChain, LengthChangingEditShiftsLaterSpan) {
  const Tokens t{"a", "b", "c", "d", "e"};
  const EditOperation grow{1, 2, {"x", "y"}, "A"};
  const EditOperation later{3, 4, {"z"}, "B"};
  const Tokens want{"a", "x", "y", "c", "z", "e"};
  const auto ab = usim::replay(t, {grow, later}, {0, 1});
  const auto ba = usim::replay(t, {grow, later}, {1, 0});
  EXPECT_EQ(ab.back(), want);
  EXPECT_EQ(ba.back(), want);
  EXPECT_EQ(ab[1], (Tokens{"a", "x", "y", "c", "d", "e"}));
  EXPECT_EQ(ba[1], (Tokens{"a", "b", "c", "z", "e"}));
}

TEST(BuildChain, RejectsOverlaps) {
  const Tokens t{"a", "b", "c", "d"};
  EXPECT_THROW(usim::build_chain("s", t, {{0, 2, {}, "X"}, {1, 3, {}, "Y"}}, 1), usim::PreconditionError);
  EXPECT_THROW(usim::build_chain("s", t, {{2, 2, {"p"}, "X"}, {2, 2, {"q"}, "Y"}}, 1), usim::PreconditionError);
  EXPECT_THROW(usim::build_chain("s", t, {{3, 5, {}, "X"}}, 1), usim::PreconditionError);
  // touching spans and an insertion at a span boundary are fine
  EXPECT_NO_THROW(usim::build_chain("s", t, {{0, 2, {"p"}, "X"}, {2, 2, {"q"}, "Y"}, {2, 4, {}, "Z"}}, 1));
}

TEST(BuildChain, DeterministicAndSeedSensitive) {
  const Tokens t{"a", "b", "c", "d", "e", "f"};
  const std::vector<EditOperation> edits{{0, 1, {"A"}, "X"}, {2, 3, {}, "Y"}, {4, 4, {"I"}, "Z"}, {5, 6, {"F", "G"}, "X"}};
  const auto a = usim::build_chain("s", t, edits, 42);
  const auto b = usim::build_chain("s", t, edits, 42);
  EXPECT_EQ(a, b);
  EXPECT_EQ(usim::emit_manifest({a}), usim::emit_manifest({b}));
  std::set<std::vector<std::size_t>> orders;
  for (std::uint64_t seed = 0; seed < 64; ++seed) orders.insert(usim::build_chain("s", t, edits, seed).order);
  EXPECT_GT(orders.size(), 10u);
}

TEST(BuildChain, PinnedSource) {
  const Tokens t{"a", "b"};
  const auto c = usim::build_chain("s", t, {{0, 1, {"A"}, "X"}}, 5, 1);
  EXPECT_EQ(c.source_index, 1u);
  EXPECT_THROW(usim::build_chain("s", t, {{0, 1, {"A"}, "X"}}, 5, 2), usim::PreconditionError);
}

TEST(BuildChain, FinalVersionIsOrderInvariant) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto tokens = usim::testing::random_tokens(rng, 1, 10);
    std::vector<EditOperation> edits;
    std::size_t pos = 0;
    while (edits.size() < 4 && pos <= tokens.size()) {
      const std::size_t start = usim::testing::uniform(rng, pos, tokens.size());
      const std::size_t end = usim::testing::uniform(rng, start, std::min(tokens.size(), start + 2));
      Tokens rep(usim::testing::uniform(rng, end == start ? 1 : 0, 2), "r" + std::to_string(edits.size()));
      edits.push_back({start, end, rep, "T"});
      pos = end + 1;
    }
    std::vector<std::size_t> order(edits.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto reference = usim::replay(tokens, edits, order).back();
    do {
      ASSERT_EQ(usim::replay(tokens, edits, order).back(), reference) << "trial " << trial;
    } while (std::next_permutation(order.begin(), order.end()));
  }
}

TEST(Manifest, VersionsAndRoundTrip) {
  const auto c1 = usim::build_chain("s1", {"a", "b", "c"}, {{0, 1, {"A"}, "X"}, {2, 3, {"C"}, "Y"}}, 3);
  const auto doc = usim::manifest_to_json({c1});
  EXPECT_EQ(doc["versions"].size(), 3u);
  EXPECT_EQ(doc["versions"][0]["version_id"], "s1.v0");

  // a no-op edit yields identical versions that still get their own ids
  const auto c2 = usim::build_chain("s2", {"a"}, {{0, 1, {"a"}, "Noop"}}, 3);
  const auto both = usim::manifest_to_json({c1, c2});
  EXPECT_EQ(both["versions"].size(), 5u);
  EXPECT_EQ(both["versions"][3]["tokens"], both["versions"][4]["tokens"]);

  const auto text = usim::emit_manifest({c1, c2});
  const auto back = usim::parse_manifest(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], c1);
  EXPECT_EQ(back[1], c2);
  EXPECT_EQ(usim::emit_manifest(back), text);
}

TEST(Manifest, TamperedVersionsAreRejected) {
  const auto c = usim::build_chain("s", {"a", "b"}, {{0, 1, {"A"}, "X"}}, 3);
  auto doc = usim::manifest_to_json({c});
  doc["versions"][1]["tokens"] = {"Q", "b"};
  EXPECT_THROW(usim::parse_manifest(doc.dump()), usim::FormatError);
  EXPECT_THROW(usim::parse_manifest("{}"), usim::FormatError);
  EXPECT_THROW(usim::parse_manifest("not json"), usim::FormatError);
}

TEST(EditCorpus, ParseAndErrors) {
  const std::string text =
      R"({"sentence_id":"s1","tokens":["He","gve"],"edits":[{"start":1,"end":2,"replacement":["gave"],"type":"Mec"}]})"
      "\n\n"
      R"({"sentence_id":"s2","tokens":["x"],"edits":[]})"
      "\n";
  const auto records = usim::parse_edit_corpus(text);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].edits[0].type, "Mec");
  EXPECT_THROW(usim::generate_chains({records[0], records[0]}, 1), usim::PairingError);
  try {
    usim::parse_edit_corpus(text + R"({"sentence_id":"s3","tokens":["x"]})" "\n", "e.jsonl");
    FAIL();
  } catch (const usim::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("e.jsonl:4"), std::string::npos) << e.what();
  }
  EXPECT_THROW(usim::parse_edit_corpus(R"({"sentence_id":"a/b","tokens":["x"],"edits":[]})"), usim::FormatError);
}

TEST(GenerateChains, SeedsDependOnSentenceNotPosition) {
  const std::vector<usim::EditRecord> recs{
      {"s1", {"a", "b", "c"}, {{0, 1, {"A"}, "X"}, {1, 2, {"B"}, "Y"}, {2, 3, {"C"}, "Z"}}},
      {"s2", {"a", "b", "c"}, {{0, 1, {"A"}, "X"}, {1, 2, {"B"}, "Y"}, {2, 3, {"C"}, "Z"}}}};
  const auto fwd = usim::generate_chains(recs, 7);
  const auto rev = usim::generate_chains({recs[1], recs[0]}, 7);
  EXPECT_EQ(fwd[0], rev[1]);
  EXPECT_EQ(fwd[1], rev[0]);
}

TEST(Deltas, Aggregation) {
  const auto one = usim::aggregate_deltas({{"s", 1, "Mec", 0.9 - 0.8}});
  ASSERT_EQ(one.types.size(), 1u);
  EXPECT_NEAR(one.types[0].delta_mean, 0.1, 1e-12);
  EXPECT_EQ(one.types[0].occurrences, 1u);

  const auto two = usim::aggregate_deltas({{"s", 1, "Mec", 0.1}, {"t", 1, "Mec", -0.3}, {"t", 2, "Wci", 0.5}});
  ASSERT_EQ(two.types.size(), 2u);
  EXPECT_EQ(two.types[0].type, "Wci");
  EXPECT_NEAR(two.types[1].delta_mean, -0.1, 1e-12);
  EXPECT_EQ(two.types[1].occurrences, 2u);
}

TEST(Deltas, IdentityParserGivesZero) {
  const auto chains = usim::generate_chains(
      {{"s1", {"a", "bb", "c"}, {{0, 1, {"aa"}, "X"}, {2, 3, {}, "Y"}}}, {"s2", {"q"}, {{1, 1, {"r"}, "X"}}}}, 5);
  const auto g = usim::testing::toy_parse("same", {"z", "zz"});
  const auto report = usim::compute_deltas(chains, [&](const std::string&) -> const usim::SemanticGraph& { return g; });
  EXPECT_EQ(report.edits.size(), 3u);
  for (const auto& d : report.edits) EXPECT_EQ(d.delta, 0.0);
}

TEST(Deltas, MatchDirectScoresAndConserveMass) {
  std::mt19937_64 rng(32);
  std::vector<usim::EditRecord> recs;
  for (int i = 0; i < 10; ++i) {
    auto tokens = usim::testing::random_tokens(rng, 2, 8);
    std::vector<EditOperation> edits;
    for (std::size_t p = 0; p < tokens.size() && edits.size() < 3; p += 2)
      edits.push_back({p, p + 1, {usim::testing::random_word(rng)}, std::string(1, static_cast<char>('A' + p % 3))});
    recs.push_back({"s" + std::to_string(i), tokens, edits});
  }
  const auto chains = usim::generate_chains(recs, 11);
  std::map<std::string, usim::SemanticGraph> graphs;
  for (const auto& c : chains)
    for (std::size_t k = 0; k < c.versions.size(); ++k) graphs.emplace(c.version_id(k), usim::testing::toy_parse(c.version_id(k), c.versions[k]));
  const usim::GraphLookup lookup = [&](const std::string& vid) -> const usim::SemanticGraph& { return graphs.at(vid); };
  const auto report = usim::compute_deltas(chains, lookup);
  const auto parallel = usim::compute_deltas(chains, lookup, {}, 4);

  double raw = 0.0, weighted = 0.0;
  std::size_t at = 0;
  for (const auto& c : chains) {
    const auto& src = graphs.at(c.version_id(c.source_index));
    for (std::size_t k = 1; k < c.versions.size(); ++k, ++at) {
      const double want = usim::to_double(usim::usim(src, graphs.at(c.version_id(k))).average) -
                          usim::to_double(usim::usim(src, graphs.at(c.version_id(k - 1))).average);
      ASSERT_EQ(report.edits[at].delta, want);
      ASSERT_EQ(parallel.edits[at].delta, want);
      raw += want;
    }
  }
  for (const auto& t : report.types) weighted += t.delta_mean * static_cast<double>(t.occurrences);
  EXPECT_NEAR(weighted, raw, 1e-12);
}

TEST(Deltas, MissingVersionsAreNamed) {
  const auto chains = usim::generate_chains({{"s1", {"a", "b"}, {{0, 1, {"c"}, "X"}}}}, 1);
  const auto missing = usim::missing_versions(chains, [](const std::string& v) { return v == "s1.v0"; });
  EXPECT_EQ(missing, (std::vector<std::string>{"s1.v1"}));
}

}  // namespace
