#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "graph_builder.hpp"
#include "usim/edit_harness.hpp"
#include "usim/graph_io.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int status = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("usim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) const {
    const auto err_path = dir_ / "stderr.txt";
    const std::string cmd = std::string(USIM_CLI) + " " + args + " 2>" + err_path.string();
    CliResult r;
    FILE* p = popen(cmd.c_str(), "r");
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int raw = pclose(p);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream e(err_path);
    std::stringstream ss;
    ss << e.rdbuf();
    r.err = ss.str();
    return r;
  }

  std::string write(const std::string& name, const std::string& text) const {
    const auto p = dir_ / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }

  std::string data(const std::string& name) const { return std::string(USIM_TEST_DATA) + "/" + name; }

  fs::path dir_;
};

TEST_F(Cli, ScoreIdenticalGraphs) {
  const auto f = data("apple_source.json");
  const auto r = run("score " + f + " " + f);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("\t1.0000\t1.0000\t1.0000\t1.0000\t1.0000\t1.0000\t1.0000"), std::string::npos) << r.out;
}

TEST_F(Cli, ScoreWorkedExample) {
  const auto r = run("score " + data("apple_source.json") + " " + data("apple_correction.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  // s_to_c 7/7 7/9 7/8, c_to_s 5/7 5/9 5/8, average 3/4
  EXPECT_NE(r.out.find("apple\t1.0000\t0.7778\t0.8750\t0.7143\t0.5556\t0.6250\t0.7500"), std::string::npos) << r.out;
  const auto j = run("score --format json-lines " + data("apple_source.json") + " " + data("apple_correction.json"));
  ASSERT_EQ(j.status, 0) << j.err;
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_DOUBLE_EQ(doc["average"].get<double>(), 0.75);
}

TEST_F(Cli, ErrorExitCodes) {
  EXPECT_EQ(run("score /nonexistent/a.json /nonexistent/b.json").status, 6);
  const auto bad = write("bad.json", "{\"id\": ");
  EXPECT_EQ(run("score " + bad + " " + bad).status, 2);
  const auto invalid = write("invalid.json", R"({"id":"x","tokens":["a"],"nodes":[{"id":"root"},{"id":"t0","anchor":0}],
    "edges":[{"parent":"root","child":"t0","labels":["A"]},{"parent":"root","child":"ghost","labels":["A"]}],"root":"root"})");
  const auto r = run("score " + invalid + " " + invalid);
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.err.find("ghost"), std::string::npos) << r.err;
  EXPECT_NE(run("score --max-norm-dist 2 " + bad + " " + bad).status, 0);
  EXPECT_NE(run("frobnicate").status, 0);
}

TEST_F(Cli, CorpusSequentialAndParallelAgree) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 12; ++i) {
    const auto id = "sent" + std::to_string(i);
    const auto toks = usim::testing::random_tokens(rng, 2, 8);
    write("src/" + id + ".json", usim::serialize(usim::testing::random_dag(rng, toks, id)));
    if (i != 5) write("cor/" + id + ".json", usim::serialize(usim::testing::random_dag(rng, toks, id)));
  }
  const auto args = "corpus " + (dir_ / "src").string() + " " + (dir_ / "cor").string();
  const auto seq = run(args + " --jobs 1");
  const auto par = run(args + " --jobs 4");
  ASSERT_EQ(seq.status, 0) << seq.err;
  EXPECT_EQ(seq.out, par.out);
  EXPECT_NE(seq.out.find("unpaired\tsource\tsent5"), std::string::npos) << seq.out;
  EXPECT_NE(seq.out.find("\nmean\t"), std::string::npos);
  const auto js = run(args + " --format json-lines --jobs 3");
  ASSERT_EQ(js.status, 0);
  std::istringstream lines(js.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    EXPECT_NO_THROW(nlohmann::json::parse(line)) << line;
    ++n;
  }
  EXPECT_EQ(n, 11u + 1u + 1u);
}

TEST_F(Cli, CorpusIdenticalAveragesOne) {
  const auto g = usim::serialize(usim::testing::brackets("a", "[A x] [P y]"));
  const auto h = usim::serialize(usim::testing::brackets("b", "[H [A p] [P q] [D r]]"));
  const auto lines = write("c.jsonl", g + "\n" + h + "\n");
  const auto r = run("corpus " + lines + " " + lines);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("mean\t1.0000\t1.0000\t1.0000\t1.0000\t1.0000\t1.0000\t1.0000"), std::string::npos) << r.out;
}

TEST_F(Cli, CorpusHeavyRewriteScoresLower) {
  const auto src = usim::serialize(usim::testing::brackets("a", "[H [A He] [P gave] [A [E an] [C apple]] [A [R to] [C John]]]"));
  const auto cut = usim::serialize(usim::testing::brackets("a", "[H [A He] [P left]]"));
  const auto s = write("s.jsonl", src + "\n");
  const auto c = write("c.jsonl", cut + "\n");
  const auto mean_average = [](const std::string& report) {
    const auto at = report.find("mean\t");
    std::istringstream row(report.substr(at));
    std::string field;
    for (int i = 0; i < 8; ++i) std::getline(row, field, '\t');
    return std::stod(field);
  };
  const auto same = run("corpus " + s + " " + s);
  const auto heavy = run("corpus " + s + " " + c);
  ASSERT_EQ(heavy.status, 0) << heavy.err;
  EXPECT_LT(mean_average(heavy.out), mean_average(same.out));
}

TEST_F(Cli, DistsimGroups) {
  const auto s = write("s.jsonl", usim::serialize(usim::testing::brackets("1", "[A a] [A b] [D c] [P d]")) + "\n");
  const auto c = write("c.jsonl", usim::serialize(usim::testing::brackets("1", "[A a] [P b] [D c] [P d]")) + "\n");
  const auto same = run("distsim " + s + " " + s);
  ASSERT_EQ(same.status, 0) << same.err;
  EXPECT_NE(same.out.find("A+D\tA,D\t0.0000"), std::string::npos) << same.out;
  const auto diff = run("distsim " + s + " " + c);
  EXPECT_NE(diff.out.find("A+D\tA,D\t1.0000"), std::string::npos) << diff.out;
  EXPECT_NE(diff.out.find("\nP\tP\t1.0000"), std::string::npos) << diff.out;
  const auto groups = write("g.json", R"([{"name":"Participants","labels":["A"]}])");
  const auto custom = run("distsim --groups " + groups + " " + s + " " + c);
  ASSERT_EQ(custom.status, 0) << custom.err;
  EXPECT_NE(custom.out.find("Participants\tA\t1.0000"), std::string::npos) << custom.out;
  EXPECT_EQ(custom.out.find("A+D"), std::string::npos);
}

TEST_F(Cli, AlignDump) {
  const auto r = run("align " + data("apple_source.json") + " " + data("apple_correction.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["total_cost"], 2);
  EXPECT_EQ(doc["leaf_pairs"].size(), 5u);
}

TEST_F(Cli, MaegeRoundTrip) {
  const auto edits = write("edits.jsonl",
                           R"({"sentence_id":"s1","tokens":["He","gve","an","apple"],"edits":[{"start":1,"end":2,"replacement":["gave"],"type":"Mec"},{"start":2,"end":3,"replacement":[],"type":"ArtOrDet"}]})"
                           "\n"
                           R"({"sentence_id":"s2","tokens":["a","b"],"edits":[{"start":2,"end":2,"replacement":["c"],"type":"Wci"}]})"
                           "\n");
  const auto m1 = run("maege gen " + edits + " --seed 9");
  const auto m2 = run("maege gen " + edits + " --seed 9");
  ASSERT_EQ(m1.status, 0) << m1.err;
  EXPECT_EQ(m1.out, m2.out);
  const auto manifest = write("manifest.json", m1.out);
  const auto chains = usim::parse_manifest(m1.out);

  const auto same = usim::serialize(usim::testing::brackets("g", "[A x] [P y]"));
  write("graphs/s1.v0.json", same);
  const auto missing = run("maege score " + manifest + " " + (dir_ / "graphs").string());
  EXPECT_EQ(missing.status, 4);
  EXPECT_NE(missing.err.find("s1.v1"), std::string::npos) << missing.err;

  for (const auto& c : chains)
    for (std::size_t k = 0; k < c.versions.size(); ++k) write("graphs/" + c.version_id(k) + ".json", same);
  const auto zero = run("maege score " + manifest + " " + (dir_ / "graphs").string());
  ASSERT_EQ(zero.status, 0) << zero.err;
  EXPECT_NE(zero.out.find("Mec\t0.0000\t1"), std::string::npos) << zero.out;
  EXPECT_NE(zero.out.find("Wci\t0.0000\t1"), std::string::npos) << zero.out;
}

TEST_F(Cli, HelpListsFlags) {
  const auto r = run("score --help");
  EXPECT_EQ(r.status, 0);
  for (const char* flag : {"--lowercase", "--no-remote", "--strict-parent", "--max-norm-dist", "--format", "--out"})
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  const auto g = run("maege gen --help");
  EXPECT_NE(g.out.find("--seed"), std::string::npos);
  EXPECT_NE(g.out.find("--source-index"), std::string::npos);
  EXPECT_NE(run("corpus --help").out.find("--jobs"), std::string::npos);
  EXPECT_NE(run("distsim --help").out.find("--groups"), std::string::npos);
}

}  // namespace
