// Command-line front end.
//
//   usim score SOURCE.json CORRECTION.json
//   usim corpus SOURCE_CORPUS CORRECTION_CORPUS
//   usim distsim SOURCE_CORPUS CORRECTION_CORPUS [--groups groups.json]
//   usim align SOURCE.json CORRECTION.json
//   usim maege gen EDITS.jsonl --seed 7 --out manifest.json
//   usim maege score manifest.json GRAPHS_DIR
//
// A corpus is a directory of *.json graphs or a newline-delimited file.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "usim/usim.hpp"

namespace {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kFormat = 2,
  kValidation = 3,
  kPairing = 4,
  kPrecondition = 5,
  kIo = 6,
  kInternal = 70,
};

struct RunConfig {
  std::string format = "tsv";
  bool lowercase = false;
  bool no_remote = false;
  bool strict_parent = false;
  std::optional<double> max_norm_dist;
  std::uint64_t seed = 0;
  std::optional<std::size_t> source_index;
  std::string groups_path;
  std::string out_path;
  unsigned jobs = 1;

  usim::ScoringOptions scoring() const {
    usim::ScoringOptions o;
    o.align.lowercase = lowercase;
    o.align.max_norm_dist = max_norm_dist;
    o.include_remote = !no_remote;
    o.strict_parent = strict_parent;
    return o;
  }

  usim::ReportFormat report_format() const {
    return format == "json-lines" ? usim::ReportFormat::JsonLines : usim::ReportFormat::Tsv;
  }
};

void add_format(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--format", cfg.format, "Report format")
      ->check(CLI::IsMember({"tsv", "json-lines"}))
      ->capture_default_str();
  cmd->add_option("--out", cfg.out_path, "Write the report here instead of standard output");
}

void add_scoring(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_flag("--lowercase", cfg.lowercase, "Compare token text case-insensitively (default: off)");
  cmd->add_flag("--no-remote", cfg.no_remote, "Leave remote edges out of every count (default: included)");
  cmd->add_flag("--strict-parent", cfg.strict_parent,
                "Also require aligned parents for an edge match (default: children only)");
  cmd->add_option("--max-norm-dist", cfg.max_norm_dist,
                  "Never align tokens whose edit distance over the longer length exceeds this (default: no bound)")
      ->check(CLI::Range(0.0, 1.0));
}

void add_jobs(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--jobs", cfg.jobs, "Worker threads; output is identical for any value")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

void write_output(const RunConfig& cfg, const std::string& text) {
  if (cfg.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(cfg.out_path, std::ios::binary);
  if (!out) throw usim::IoError(fmt::format("cannot write '{}'", cfg.out_path));
  out << text;
  if (!out) throw usim::IoError(fmt::format("write to '{}' failed", cfg.out_path));
}

std::vector<usim::LabelGroup> read_groups(const std::string& path) {
  const auto text = usim::read_file(path);
  try {
    const auto doc = nlohmann::json::parse(text);
    std::vector<usim::LabelGroup> groups;
    for (const auto& g : doc) {
      usim::LabelGroup lg{g.at("name").get<std::string>(), g.at("labels").get<std::vector<std::string>>()};
      if (lg.name.empty() || lg.labels.empty())
        throw usim::FormatError(fmt::format("{}: every group needs a name and at least one label", path));
      groups.push_back(std::move(lg));
    }
    if (groups.empty()) throw usim::FormatError(fmt::format("{}: no groups defined", path));
    return groups;
  } catch (const nlohmann::json::exception& e) {
    throw usim::FormatError(fmt::format("{}: {}", path, e.what()));
  }
}

int cmd_score(const RunConfig& cfg, const std::string& source, const std::string& correction) {
  const auto gs = usim::read_graph_file(source);
  const auto gc = usim::read_graph_file(correction);
  write_output(cfg, usim::format_single_score(gs.id(), usim::usim(gs, gc, cfg.scoring()), cfg.report_format()));
  return kOk;
}

int cmd_align(const RunConfig& cfg, const std::string& source, const std::string& correction) {
  const auto gs = usim::read_graph_file(source);
  const auto gc = usim::read_graph_file(correction);
  const auto leaves = usim::align_leaves(gs.token_texts(), gc.token_texts(), cfg.scoring().align);
  write_output(cfg, usim::alignment_dump(gs, gc, leaves).dump(1) + "\n");
  return kOk;
}

int cmd_corpus(const RunConfig& cfg, const std::string& source, const std::string& correction) {
  const auto sources = usim::read_corpus(source);
  const auto corrections = usim::read_corpus(correction);
  const auto pairing = usim::pair_corpora(sources, corrections);
  for (const auto& id : pairing.unpaired_source) std::cerr << "warning: unpaired source id '" << id << "'\n";
  for (const auto& id : pairing.unpaired_correction) std::cerr << "warning: unpaired correction id '" << id << "'\n";
  const auto scores = usim::score_corpus(sources, corrections, pairing, cfg.scoring(), cfg.jobs);
  write_output(cfg, usim::format_corpus_report(scores, pairing, cfg.report_format()));
  return kOk;
}

int cmd_distsim(const RunConfig& cfg, const std::string& source, const std::string& correction) {
  const auto sources = usim::read_corpus(source);
  const auto corrections = usim::read_corpus(correction);
  const auto pairing = usim::pair_corpora(sources, corrections);
  if (pairing.pairs.empty()) throw usim::PairingError("no graph ids are shared by the two corpora");
  for (const auto& id : pairing.unpaired_source) std::cerr << "warning: unpaired source id '" << id << "'\n";
  for (const auto& id : pairing.unpaired_correction) std::cerr << "warning: unpaired correction id '" << id << "'\n";
  std::vector<usim::SemanticGraph> s, c;
  for (const auto& [i, j] : pairing.pairs) {
    s.push_back(sources[i]);
    c.push_back(corrections[j]);
  }
  const auto groups = cfg.groups_path.empty() ? usim::default_label_groups(s, c) : read_groups(cfg.groups_path);
  const auto rows = usim::distsim(s, c, groups, !cfg.no_remote);
  write_output(cfg, usim::format_distsim(rows, s.size(), cfg.report_format()));
  return kOk;
}

int cmd_maege_gen(const RunConfig& cfg, const std::string& edits_path) {
  const auto records = usim::parse_edit_corpus(usim::read_file(edits_path), edits_path);
  const auto chains = usim::generate_chains(records, cfg.seed, cfg.source_index);
  write_output(cfg, usim::emit_manifest(chains));
  return kOk;
}

int cmd_maege_score(const RunConfig& cfg, const std::string& manifest_path, const std::string& graphs_dir) {
  const auto chains = usim::parse_manifest(usim::read_file(manifest_path), manifest_path);
  const auto file_of = [&](const std::string& vid) { return fs::path(graphs_dir) / (vid + ".json"); };
  const auto missing = usim::missing_versions(chains, [&](const std::string& vid) { return fs::is_regular_file(file_of(vid)); });
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw usim::PairingError(fmt::format("no parsed graph for version id(s): {}", list));
  }
  std::map<std::string, usim::SemanticGraph> graphs;
  for (const auto& c : chains)
    for (std::size_t k = 0; k < c.versions.size(); ++k) {
      const auto vid = c.version_id(k);
      graphs.emplace(vid, usim::read_graph_file(file_of(vid)));
    }
  const auto report = usim::compute_deltas(
      chains, [&](const std::string& vid) -> const usim::SemanticGraph& { return graphs.at(vid); }, cfg.scoring(),
      cfg.jobs);
  write_output(cfg, usim::format_deltas(report, cfg.report_format()));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference-less semantic faithfulness scores over semantic graphs"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string a, b;

  auto* score = app.add_subcommand("score", "Score one source/correction graph pair in both directions");
  score->add_option("source", a, "Source graph file")->required();
  score->add_option("correction", b, "Correction graph file")->required();
  add_format(score, cfg);
  add_scoring(score, cfg);

  auto* corpus = app.add_subcommand("corpus", "Score every id shared by two corpora, plus field means");
  corpus->add_option("source", a, "Source corpus (directory or newline-delimited file)")->required();
  corpus->add_option("correction", b, "Correction corpus (directory or newline-delimited file)")->required();
  add_format(corpus, cfg);
  add_scoring(corpus, cfg);
  add_jobs(corpus, cfg);

  auto* dist = app.add_subcommand("distsim", "Mean absolute label-count difference per label group");
  dist->add_option("source", a, "Source corpus")->required();
  dist->add_option("correction", b, "Correction corpus")->required();
  dist->add_option("--groups", cfg.groups_path,
                   "JSON list of {name, labels} groups (default: A+D, Scene = H, then one group per observed label)");
  dist->add_flag("--no-remote", cfg.no_remote, "Leave remote edges out of the counts (default: included)");
  add_format(dist, cfg);

  auto* align = app.add_subcommand("align", "Dump the token and node alignments of a graph pair");
  align->add_option("source", a, "Source graph file")->required();
  align->add_option("correction", b, "Correction graph file")->required();
  align->add_option("--out", cfg.out_path, "Write the dump here instead of standard output");
  align->add_flag("--lowercase", cfg.lowercase, "Compare token text case-insensitively (default: off)");
  align->add_option("--max-norm-dist", cfg.max_norm_dist, "Alignment distance bound (default: no bound)")
      ->check(CLI::Range(0.0, 1.0));

  auto* maege = app.add_subcommand("maege", "Per-edit-type sensitivity harness");
  maege->require_subcommand(1);
  auto* gen = maege->add_subcommand("gen", "Apply edits in seeded random orders and write a version manifest");
  gen->add_option("edits", a, "Newline-delimited edit corpus")->required();
  gen->add_option("--seed", cfg.seed, "Master RNG seed")->capture_default_str();
  gen->add_option("--source-index", cfg.source_index,
                  "Use this chain position as the comparison source instead of sampling it");
  gen->add_option("--out", cfg.out_path, "Write the manifest here instead of standard output");

  auto* mscore = maege->add_subcommand("score", "Average the USim change of each edit type");
  mscore->add_option("manifest", a, "Manifest written by 'maege gen'")->required();
  mscore->add_option("graphs", b, "Directory holding <version_id>.json for every version")->required();
  add_format(mscore, cfg);
  add_scoring(mscore, cfg);
  add_jobs(mscore, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*score) return cmd_score(cfg, a, b);
    if (*corpus) return cmd_corpus(cfg, a, b);
    if (*dist) return cmd_distsim(cfg, a, b);
    if (*align) return cmd_align(cfg, a, b);
    if (*gen) return cmd_maege_gen(cfg, a);
    if (*mscore) return cmd_maege_score(cfg, a, b);
  } catch (const usim::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kFormat;
  } catch (const usim::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const usim::PairingError& e) {
    std::cerr << "pairing error: " << e.what() << "\n";
    return kPairing;
  } catch (const usim::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const usim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
