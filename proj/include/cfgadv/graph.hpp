#ifndef CFGADV_GRAPH_HPP
#define CFGADV_GRAPH_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cfgadv/error.hpp"

namespace cfgadv {

enum class Label { Benign, Malicious };

inline std::string_view to_string(Label l) { return l == Label::Benign ? "benign" : "malicious"; }

inline Label opposite(Label l) { return l == Label::Benign ? Label::Malicious : Label::Benign; }

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "benign") return Label::Benign;
  if (s == "malicious") return Label::Malicious;
  return std::nullopt;
}

using NodeId = std::string;
using Edge = std::pair<NodeId, NodeId>;

/// Control-flow graph over opaque string node ids.
///
/// Fields are public so that broken graphs can be represented and reported by
/// validate(); graphs produced by parse_cfg() or Cfg::build() always validate.
/// Exits are derived: recompute_exits() resets them to the out-degree-0 nodes.
struct Cfg {
  std::string name = "cfg";
  std::vector<NodeId> nodes;
  std::vector<Edge> edges;
  NodeId entry;
  std::set<NodeId> exits;
  std::optional<Label> label;

  void recompute_exits() {
    std::set<NodeId> has_succ;
    for (const auto& e : edges) has_succ.insert(e.first);
    exits.clear();
    for (const auto& n : nodes)
      if (!has_succ.count(n)) exits.insert(n);
  }

  void add_node(NodeId id) { nodes.push_back(std::move(id)); }

  void add_edge(NodeId src, NodeId dst) {
    edges.emplace_back(std::move(src), std::move(dst));
  }

  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }

  /// Builds a graph and throws InvariantError if it does not validate.
  static Cfg build(std::string name, NodeId entry, std::vector<NodeId> nodes,
                   std::vector<Edge> edges, std::optional<Label> label = std::nullopt);
};

/// Structural equality: node set, edge set, entry and exits. Name and label are metadata.
inline bool structurally_equal(const Cfg& a, const Cfg& b) {
  if (a.entry != b.entry || a.exits != b.exits) return false;
  std::set<NodeId> na(a.nodes.begin(), a.nodes.end()), nb(b.nodes.begin(), b.nodes.end());
  if (na != nb || a.nodes.size() != b.nodes.size()) return false;
  std::set<Edge> ea(a.edges.begin(), a.edges.end()), eb(b.edges.begin(), b.edges.end());
  return ea == eb && a.edges.size() == b.edges.size();
}

inline bool valid_node_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
           c == ':' || c == '.' || c == '-';
  });
}

/// Returns one "<rule>: <element>" string per violated invariant; empty iff valid.
inline std::vector<std::string> validate(const Cfg& g) {
  std::vector<std::string> out;
  if (g.nodes.empty()) out.emplace_back("empty-graph: " + g.name);

  std::set<NodeId> declared;
  for (const auto& n : g.nodes) {
    if (!valid_node_id(n)) out.push_back("invalid-node-id: " + n);
    if (!declared.insert(n).second) out.push_back("duplicate-node: " + n);
  }
  if (!g.nodes.empty() && !declared.count(g.entry)) out.push_back("undeclared-entry: " + g.entry);

  std::set<Edge> seen;
  std::set<NodeId> undeclared;
  std::map<NodeId, std::size_t> out_degree;
  for (const auto& e : g.edges) {
    for (const auto* end : {&e.first, &e.second})
      if (!declared.count(*end) && undeclared.insert(*end).second)
        out.push_back("undeclared-node: " + *end);
    if (!seen.insert(e).second) out.push_back("duplicate-edge: " + e.first + "->" + e.second);
    if (e.first == e.second && e.first == g.entry) out.push_back("entry-self-loop: " + e.first);
    ++out_degree[e.first];
  }

  for (const auto& x : g.exits) {
    if (!declared.count(x))
      out.push_back("undeclared-exit: " + x);
    else if (out_degree.count(x))
      out.push_back("exit-has-successor: " + x);
  }
  for (const auto& n : declared)
    if (!out_degree.count(n) && !g.exits.count(n)) out.push_back("missing-exit: " + n);
  return out;
}

inline Cfg Cfg::build(std::string name, NodeId entry, std::vector<NodeId> nodes, std::vector<Edge> edges,
                      std::optional<Label> label) {
  Cfg g;
  g.name = std::move(name);
  g.entry = std::move(entry);
  g.nodes = std::move(nodes);
  g.edges = std::move(edges);
  g.label = label;
  g.recompute_exits();
  if (auto v = validate(g); !v.empty()) throw InvariantError("invalid cfg '" + g.name + "': " + v.front());
  return g;
}

// ---------------------------------------------------------------------------
// Text format
//
//   cfg <name>
//   entry <node>
//   label <benign|malicious|unlabeled>
//   node <id>     (zero or more)
//   edge <s> <d>  (zero or more)
//
// '#' starts a comment. Blank lines are ignored.
// ---------------------------------------------------------------------------

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : DataError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    toks.push_back({line.substr(start, i - start), start + 1});
  }
  return toks;
}

}  // namespace detail

inline Cfg parse_cfg(std::string_view text) {
  Cfg g;
  enum class Stage { Header, Entry, Label, Body } stage = Stage::Header;
  bool seen_edge = false;
  std::set<NodeId> declared;
  std::set<Edge> edge_set;
  std::size_t entry_line = 0, entry_col = 0;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++lineno;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;

    const auto& kw = toks[0];
    auto expect_args = [&](std::size_t n) {
      if (toks.size() != n + 1)
        throw ParseError(lineno, kw.column,
                         "'" + std::string(kw.text) + "' expects " + std::to_string(n) + " argument(s)");
    };
    auto check_id = [&](const detail::Token& t) {
      if (!valid_node_id(t.text)) throw ParseError(lineno, t.column, "invalid node id '" + std::string(t.text) + "'");
    };

    switch (stage) {
      case Stage::Header:
        if (kw.text != "cfg") throw ParseError(lineno, kw.column, "expected 'cfg <name>' header");
        expect_args(1);
        g.name = std::string(toks[1].text);
        stage = Stage::Entry;
        break;
      case Stage::Entry:
        if (kw.text != "entry") throw ParseError(lineno, kw.column, "missing entry declaration");
        expect_args(1);
        check_id(toks[1]);
        g.entry = std::string(toks[1].text);
        entry_line = lineno;
        entry_col = toks[1].column;
        stage = Stage::Label;
        break;
      case Stage::Label: {
        if (kw.text != "label") throw ParseError(lineno, kw.column, "expected 'label <benign|malicious|unlabeled>'");
        expect_args(1);
        if (toks[1].text != "unlabeled") {
          auto l = parse_label(toks[1].text);
          if (!l) throw ParseError(lineno, toks[1].column, "unknown label '" + std::string(toks[1].text) + "'");
          g.label = *l;
        }
        stage = Stage::Body;
        break;
      }
      case Stage::Body:
        if (kw.text == "node") {
          if (seen_edge) throw ParseError(lineno, kw.column, "node declaration after edge section");
          expect_args(1);
          check_id(toks[1]);
          std::string id(toks[1].text);
          if (!declared.insert(id).second) throw ParseError(lineno, toks[1].column, "duplicate node '" + id + "'");
          g.nodes.push_back(std::move(id));
        } else if (kw.text == "edge") {
          seen_edge = true;
          expect_args(2);
          for (std::size_t k = 1; k <= 2; ++k) {
            check_id(toks[k]);
            if (!declared.count(std::string(toks[k].text)))
              throw ParseError(lineno, toks[k].column, "undeclared-node: " + std::string(toks[k].text));
          }
          Edge e{std::string(toks[1].text), std::string(toks[2].text)};
          if (e.first == e.second && e.first == g.entry)
            throw ParseError(lineno, toks[1].column, "entry-self-loop: " + e.first);
          if (!edge_set.insert(e).second)
            throw ParseError(lineno, kw.column, "duplicate edge '" + e.first + " " + e.second + "'");
          g.edges.push_back(std::move(e));
        } else {
          throw ParseError(lineno, kw.column, "unknown directive '" + std::string(kw.text) + "'");
        }
        break;
    }
  }

  if (stage == Stage::Header) throw ParseError(lineno, 1, "empty document");
  if (stage == Stage::Entry) throw ParseError(lineno, 1, "missing entry declaration");
  if (stage == Stage::Label) throw ParseError(lineno, 1, "missing label declaration");
  if (g.nodes.empty()) throw ParseError(lineno, 1, "empty graph");
  if (!declared.count(g.entry)) throw ParseError(entry_line, entry_col, "undeclared-node: " + g.entry);
  g.recompute_exits();
  return g;
}

/// Sorted, comment-free rendering. The edge section is delimited by the node
/// lines, so a single-node graph renders as header lines plus one node line.
inline std::string serialize_cfg(const Cfg& g) {
  std::vector<NodeId> nodes = g.nodes;
  std::sort(nodes.begin(), nodes.end());
  std::vector<Edge> edges = g.edges;
  std::sort(edges.begin(), edges.end());

  std::string out;
  out += "cfg " + g.name + "\n";
  out += "entry " + g.entry + "\n";
  out += "label ";
  out += g.label ? std::string(to_string(*g.label)) : std::string("unlabeled");
  out += "\n";
  for (const auto& n : nodes) out += "node " + n + "\n";
  for (const auto& [s, d] : edges) out += "edge " + s + " " + d + "\n";
  return out;
}

/// Compact adjacency view with nodes indexed in declaration order.
struct IndexedGraph {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::vector<std::size_t>> in;
  std::size_t entry = 0;

  std::size_t size() const { return out.size(); }

  explicit IndexedGraph(const Cfg& g) : out(g.nodes.size()), in(g.nodes.size()) {
    std::unordered_map<std::string_view, std::size_t> index;
    index.reserve(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) index.emplace(g.nodes[i], i);
    for (const auto& [s, d] : g.edges) {
      auto a = index.at(s), b = index.at(d);
      out[a].push_back(b);
      in[b].push_back(a);
    }
    if (auto it = index.find(g.entry); it != index.end()) entry = it->second;
  }
};

}  // namespace cfgadv

#endif  // CFGADV_GRAPH_HPP
