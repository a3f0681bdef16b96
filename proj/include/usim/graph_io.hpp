#pragma once

// JSON interchange format for semantic graphs:
//
//   {"id": "s1", "tokens": ["He", "gave"],
//    "nodes": [{"id": "r"}, {"id": "t0", "anchor": 0}, {"id": "t1", "anchor": 1}],
//    "edges": [{"parent": "r", "child": "t0", "labels": ["A"]},
//              {"parent": "r", "child": "t1", "labels": ["P"], "remote": false}],
//    "root": "r"}
//
// A corpus is either a directory of such documents (*.json) or a single
// newline-delimited file with one document per line.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "usim/error.hpp"
#include "usim/graph.hpp"

namespace usim {

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class FieldReader {
 public:
  FieldReader(std::string source, std::size_t line) : source_(std::move(source)), line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw FormatError(fmt::format("{}:{}: field '{}': {}", source_, line_, field, what));
  }

  const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(join(path, key), "missing");
    return *it;
  }

  std::string string_field(const nlohmann::json& obj, const char* key, const std::string& path) const {
    const auto& v = require(obj, key, path);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
  }

  const nlohmann::json& array_field(const nlohmann::json& obj, const char* key, const std::string& path) const {
    const auto& v = require(obj, key, path);
    if (!v.is_array()) fail(join(path, key), "expected an array");
    return v;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace detail

inline SemanticGraph graph_from_json(const nlohmann::json& doc, const std::string& source = "<input>",
                                     std::size_t line = 1) {
  const detail::FieldReader rd(source, line);
  if (!doc.is_object()) rd.fail("<document>", "expected an object");

  std::string id = rd.string_field(doc, "id", "");

  std::vector<std::string> tokens;
  const auto& jtokens = rd.array_field(doc, "tokens", "");
  for (std::size_t i = 0; i < jtokens.size(); ++i) {
    if (!jtokens[i].is_string()) rd.fail(fmt::format("tokens[{}]", i), "expected a string");
    tokens.push_back(jtokens[i].get<std::string>());
  }

  std::vector<Node> nodes;
  const auto& jnodes = rd.array_field(doc, "nodes", "");
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const auto path = fmt::format("nodes[{}]", i);
    const auto& jn = jnodes[i];
    if (!jn.is_object()) rd.fail(path, "expected an object");
    Node n{rd.string_field(jn, "id", path), std::nullopt};
    if (auto it = jn.find("anchor"); it != jn.end() && !it->is_null()) {
      if (!it->is_number_unsigned()) rd.fail(path + ".anchor", "expected a non-negative integer");
      n.anchor = it->get<TokenIndex>();
    }
    nodes.push_back(std::move(n));
  }

  std::vector<Edge> edges;
  const auto& jedges = rd.array_field(doc, "edges", "");
  for (std::size_t i = 0; i < jedges.size(); ++i) {
    const auto path = fmt::format("edges[{}]", i);
    const auto& je = jedges[i];
    if (!je.is_object()) rd.fail(path, "expected an object");
    Edge e;
    e.parent = rd.string_field(je, "parent", path);
    e.child = rd.string_field(je, "child", path);
    const auto& jl = rd.array_field(je, "labels", path);
    for (std::size_t k = 0; k < jl.size(); ++k) {
      if (!jl[k].is_string()) rd.fail(fmt::format("{}.labels[{}]", path, k), "expected a string");
      e.labels.push_back(jl[k].get<std::string>());
    }
    if (auto it = je.find("remote"); it != je.end()) {
      if (!it->is_boolean()) rd.fail(path + ".remote", "expected a boolean");
      e.remote = it->get<bool>();
    }
    edges.push_back(std::move(e));
  }

  std::string root = rd.string_field(doc, "root", "");
  return SemanticGraph(std::move(id), std::move(tokens), std::move(nodes), std::move(edges), std::move(root));
}

inline SemanticGraph parse_graph(std::string_view text, const std::string& source = "<input>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(fmt::format("{}:{}: {}", source, detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1),
                                  e.what()));
  }
  return graph_from_json(doc, source, 1);
}

inline SemanticGraph parse_graph(std::istream& in, const std::string& source = "<input>") {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_graph(text, source);
}

inline nlohmann::ordered_json graph_to_json(const SemanticGraph& g) {
  nlohmann::ordered_json doc;
  doc["id"] = g.id();
  doc["tokens"] = g.token_texts();
  auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes()) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    if (n.anchor) jn["anchor"] = *n.anchor;
    nodes.push_back(std::move(jn));
  }
  auto& edges = doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : g.edges()) {
    nlohmann::ordered_json je;
    je["parent"] = e.parent;
    je["child"] = e.child;
    je["labels"] = e.labels;
    if (e.remote) je["remote"] = true;
    edges.push_back(std::move(je));
  }
  doc["root"] = g.root();
  return doc;
}

// Single-line rendering; suitable both as a standalone document and as one
// line of a newline-delimited corpus.
inline std::string serialize(const SemanticGraph& g) { return graph_to_json(g).dump(); }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SemanticGraph read_graph_file(const std::filesystem::path& path) {
  return parse_graph(read_file(path), path.string());
}

// Newline-delimited stream; blank lines are skipped.
inline std::vector<SemanticGraph> parse_graph_lines(std::string_view text, const std::string& source) {
  std::vector<SemanticGraph> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(line.begin(), line.end());
      } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(fmt::format("{}:{}: {}", source, line_no, e.what()));
      }
      out.push_back(graph_from_json(doc, source, line_no));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

// Directory: every *.json file in path order. Regular file: newline-delimited.
inline std::vector<SemanticGraph> read_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<SemanticGraph> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(read_graph_file(f));
    return out;
  }
  if (!fs::is_regular_file(path, ec)) throw IoError(fmt::format("no such corpus '{}'", path.string()));
  return parse_graph_lines(read_file(path), path.string());
}

}  // namespace usim
