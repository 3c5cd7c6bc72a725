#pragma once

/****************************************************************************
 * Materialized-tree serialization: JSONL for machine round trips and DOT
 * for eyeballing.  JSONL carries one header line (space and term) and one
 * line per node; reimporting and exporting again reproduces the bytes.
 ****************************************************************************/

#include <sstream>
#include <string>

#include "pitree/config.hpp"

namespace pitree {

inline std::string exportJsonl(const StaticTree& st) {
  std::ostringstream os;
  os << Json{{"space", st.space.toJson()}, {"term", st.term}}.dump() << "\n";
  for (const auto& n : st.nodes)
    os << Json{{"path", n.path}, {"height", n.path.size()}, {"leaf", n.leaf.toJson()}}
              .dump()
       << "\n";
  return os.str();
}

// reads back what exportJsonl wrote; lazily represented leaves cannot come
// back from their descriptions, so trees carrying them refuse to reimport
inline StaticTree importJsonl(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty jsonl document");
  Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("space"))
    throw ConfigError("malformed jsonl header: " + line);
  StaticTree st;
  st.space = spaceFromJson(header.at("space"));
  st.term = header.value("term", Json::object());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ConfigError("malformed jsonl node line: " + line);
    StaticNode n;
    n.path = j.at("path").get<NodePath>();
    n.leaf = setFromJson(st.space, j.at("leaf"));
    n.residualAfter = ClopenSet::empty(st.space);
    st.nodes.push_back(std::move(n));
  }
  return st;
}

namespace detail {

inline std::string dotEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // end of namespace detail

// one box per materialized node, dashed ellipsis nodes carrying the
// residual after the last explicit son
inline std::string exportDot(const StaticTree& st) {
  std::map<NodePath, size_t> index;
  for (size_t i = 0; i < st.nodes.size(); ++i) index.emplace(st.nodes[i].path, i);

  std::ostringstream os;
  os << "digraph pitree {\n";
  os << "  node [shape=box, fontname=\"monospace\"];\n";
  for (size_t i = 0; i < st.nodes.size(); ++i) {
    const StaticNode& n = st.nodes[i];
    os << "  n" << i << " [label=\"" << detail::dotEscape(pathToString(n.path)) << "\\n"
       << detail::dotEscape(n.leaf.toJson().dump()) << "\"];\n";
    if (!n.path.empty()) {
      NodePath parent(n.path.begin(), n.path.end() - 1);
      auto it = index.find(parent);
      if (it != index.end()) os << "  n" << it->second << " -> n" << i << ";\n";
    }
    if (n.expanded) {
      os << "  n" << i << "_rest [label=\"... "
         << detail::dotEscape(n.residualAfter.toJson().dump())
         << "\", style=dashed];\n";
      os << "  n" << i << " -> n" << i << "_rest [style=dashed];\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // end of namespace pitree
