// Copyright 2026 The OptiGraph Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "optigraph/io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "optigraph/error.hpp"
#include "optigraph/topology.hpp"

namespace optigraph {

using nlohmann::json;

namespace {

const char* const kPalette[12] = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
                                  "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f"};

std::string ref_name(const VarRef& v) { return v.node->name() + "." + v.node->variables()[v.index].name; }

Sense parse_sense(const std::string& s) {
  if (s == "==") return Sense::kEqual;
  if (s == "<=") return Sense::kLessEqual;
  if (s == ">=") return Sense::kGreaterEqual;
  throw ParseError("unknown constraint sense '" + s + "'");
}

json emit_node(const OptiNode& n) {
  json vars = json::array();
  for (const Variable& v : n.variables()) {
    json jv = {{"name", v.name}, {"start", v.start}};
    if (v.lower != -kInfinity) jv["lower"] = v.lower;
    if (v.upper != kInfinity) jv["upper"] = v.upper;
    vars.push_back(std::move(jv));
  }
  json cons = json::array();
  for (const NodeConstraint& c : n.constraints()) {
    json terms = json::array();
    for (const auto& [i, coef] : c.terms) terms.push_back({n.variables()[i].name, coef});
    cons.push_back({{"name", c.name}, {"terms", terms}, {"sense", std::string(to_string(c.sense))}, {"rhs", c.rhs}});
  }
  const QuadExpr& f = n.objective();
  json lin = json::array();
  for (const auto& [v, coef] : f.linear().terms()) lin.push_back({n.variables()[v.index].name, coef});
  json quad = json::array();
  for (const QuadTerm& q : f.quadratic_terms()) {
    quad.push_back({n.variables()[q.first.index].name, n.variables()[q.second.index].name, q.coef});
  }
  return {{"name", n.name()},
          {"variables", vars},
          {"constraints", cons},
          {"objective", {{"constant", f.constant()}, {"linear", lin}, {"quadratic", quad}}}};
}

json emit_graph(const OptiGraph& g) {
  json nodes = json::array();
  for (std::size_t i = 0; i < g.num_local_nodes(); ++i) nodes.push_back(emit_node(g.local_node(i)));
  json edges = json::array();
  for (std::size_t i = 0; i < g.num_local_edges(); ++i) {
    json links = json::array();
    for (const LinkConstraint& l : g.local_edge(i).link_constraints()) {
      json terms = json::array();
      for (const auto& [v, coef] : l.terms) terms.push_back({ref_name(v), coef});
      links.push_back({{"name", l.name}, {"terms", terms}, {"sense", std::string(to_string(l.sense))}, {"rhs", l.rhs}});
    }
    edges.push_back({{"links", links}});
  }
  json subs = json::array();
  for (const GraphPtr& s : g.subgraphs()) subs.push_back(emit_graph(*s));
  return {{"name", g.name()}, {"nodes", nodes}, {"edges", edges}, {"subgraphs", subs}};
}

class Reader {
 public:
  GraphPtr graph(const json& j) {
    GraphPtr g = new_graph(j.at("name").get<std::string>());
    for (const json& jn : j.at("nodes")) node(*g, jn);
    for (const json& js : j.at("subgraphs")) g->add_subgraph(graph(js));
    for (const json& je : j.at("edges")) {
      for (const json& jl : je.at("links")) {
        LinExpr e;
        for (const json& t : jl.at("terms")) e.add_term(resolve(t.at(0).get<std::string>()), t.at(1).get<double>());
        const Sense s = parse_sense(jl.at("sense").get<std::string>());
        g->add_link_constraint(constraint(e, s, jl.at("rhs").get<double>()), jl.at("name").get<std::string>());
      }
    }
    return g;
  }

 private:
  static LinearConstraint constraint(const LinExpr& e, Sense s, double rhs) { return {e, s, rhs}; }

  void node(OptiGraph& g, const json& j) {
    const std::string name = j.at("name").get<std::string>();
    if (nodes_.count(name)) throw ModelError("duplicate node name '" + name + "'");
    OptiNode& n = g.add_node(name);
    nodes_[name] = &n;
    for (const json& v : j.at("variables")) {
      n.add_variable(v.at("name").get<std::string>(), v.value("lower", -kInfinity), v.value("upper", kInfinity),
                     v.at("start").get<double>());
    }
    auto local = [&](const json& t) {
      const std::string var = t.get<std::string>();
      auto ref = n.find_variable(var);
      if (!ref) throw ReferenceError("unknown variable '" + name + "." + var + "'");
      return *ref;
    };
    for (const json& c : j.at("constraints")) {
      LinExpr e;
      for (const json& t : c.at("terms")) e.add_term(local(t.at(0)), t.at(1).get<double>());
      n.add_constraint(constraint(e, parse_sense(c.at("sense").get<std::string>()), c.at("rhs").get<double>()),
                       c.at("name").get<std::string>());
    }
    const json& f = j.at("objective");
    QuadExpr obj(f.at("constant").get<double>());
    for (const json& t : f.at("linear")) obj.linear().add_term(local(t.at(0)), t.at(1).get<double>());
    for (const json& t : f.at("quadratic")) obj.add_quadratic_term(local(t.at(0)), local(t.at(1)), t.at(2).get<double>());
    n.set_objective(std::move(obj));
  }

  // "node.var" where either part may itself contain dots; the first split
  // naming an existing variable wins.
  VarRef resolve(const std::string& ref) const {
    for (std::size_t dot = ref.find('.'); dot != std::string::npos; dot = ref.find('.', dot + 1)) {
      auto it = nodes_.find(ref.substr(0, dot));
      if (it == nodes_.end()) continue;
      if (auto v = it->second->find_variable(ref.substr(dot + 1))) return *v;
    }
    throw ReferenceError("unresolved reference '" + ref + "'");
  }

  std::unordered_map<std::string, OptiNode*> nodes_;
};

// Top-level group of every node: subgraph index, or -1 for a local node.
std::vector<int> top_groups(const OptiGraph& g, const std::vector<const OptiNode*>& nodes) {
  std::vector<int> out;
  for (const OptiNode* n : nodes) {
    int grp = -1;
    for (std::size_t s = 0; s < g.subgraphs().size(); ++s) {
      if (g.subgraphs()[s]->contains(n)) grp = static_cast<int>(s);
    }
    out.push_back(grp);
  }
  return out;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string model_to_json(const OptiGraph& graph) {
  std::set<std::string> names;
  for (const OptiNode* n : graph.all_nodes()) {
    if (!names.insert(n->name()).second) throw ModelError("duplicate node name '" + n->name() + "'");
  }
  json doc = {{"schema_version", kSchemaVersion}, {"graph", emit_graph(graph)}};
  return doc.dump(1) + "\n";
}

GraphPtr model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  try {
    if (!doc.is_object() || !doc.contains("schema_version")) throw ParseError("missing schema_version");
    const int version = doc.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw ParseError("unsupported schema_version " + std::to_string(version) + " (expected " +
                       std::to_string(kSchemaVersion) + ")");
    }
    return Reader().graph(doc.at("graph"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_model(const OptiGraph& graph, const std::filesystem::path& path) { write_text(path, model_to_json(graph)); }

GraphPtr read_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string solution_to_json(const Solution& solution, std::string_view method) {
  json values = json::object();
  if (solution.qp) {
    for (int j = 0; j < solution.qp->num_variables(); ++j) {
      values[ref_name(solution.qp->var_map[j])] = solution.x.size() ? solution.x[j] : 0.0;
    }
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"method", std::string(method)},
              {"status", std::string(to_string(solution.status))},
              {"objective", solution.objective},
              {"iterations", solution.iterations},
              {"values", values}};
  return doc.dump(1) + "\n";
}

std::string export_dot(const OptiGraph& graph, const DotOptions& opts) {
  const auto nodes = graph.all_nodes();
  const std::vector<int> group = top_groups(graph, nodes);
  std::ostringstream out;
  out << "graph " << quoted(graph.name()) << " {\n";
  if (opts.color_partitions) out << "  node [style=filled];\n";
  auto fill = [&](int g) {
    return opts.color_partitions && g >= 0 ? std::string(" [fillcolor=\"") + kPalette[g % 12] + "\"]" : std::string();
  };
  if (opts.aggregated) {
    // Vertex per subgraph, then per top-level node.
    std::vector<std::string> label;
    std::vector<int> vertex_of(nodes.size());
    for (std::size_t s = 0; s < graph.subgraphs().size(); ++s) label.push_back(graph.subgraphs()[s]->name());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (group[i] >= 0) {
        vertex_of[i] = group[i];
      } else {
        vertex_of[i] = static_cast<int>(label.size());
        label.push_back(nodes[i]->name());
      }
    }
    for (std::size_t v = 0; v < label.size(); ++v) {
      out << "  " << quoted(label[v]) << fill(v < graph.subgraphs().size() ? static_cast<int>(v) : -1) << ";\n";
    }
    const auto pos = node_positions(graph);
    std::set<std::pair<int, int>> pairs;
    for (const OptiEdge* e : graph.all_edges()) {
      std::set<int> touched;
      for (const OptiNode* n : e->nodes()) touched.insert(vertex_of[pos.at(n)]);
      for (auto a = touched.begin(); a != touched.end(); ++a) {
        for (auto b = std::next(a); b != touched.end(); ++b) pairs.emplace(*a, *b);
      }
    }
    for (const auto& [a, b] : pairs) out << "  " << quoted(label[a]) << " -- " << quoted(label[b]) << ";\n";
  } else {
    const auto [cg, ref] = to_clique_graph(graph);
    for (std::size_t i = 0; i < nodes.size(); ++i) out << "  " << quoted(nodes[i]->name()) << fill(group[i]) << ";\n";
    for (const SimpleGraph::Edge& e : cg.edges) {
      out << "  " << quoted(ref.vertex_node[e.u]->name()) << " -- " << quoted(ref.vertex_node[e.v]->name()) << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace optigraph
