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

#include "optigraph/topology.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <unordered_set>

#include "optigraph/error.hpp"

namespace optigraph {

Eigen::SparseMatrix<double> Hypergraph::incidence() const {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t e = 0; e < hyperedges.size(); ++e) {
    for (int v : hyperedges[e]) trip.emplace_back(v, static_cast<int>(e), 1.0);
  }
  Eigen::SparseMatrix<double> a(vertex_count, static_cast<Eigen::Index>(hyperedges.size()));
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

std::vector<std::vector<int>> Hypergraph::vertex_edges() const {
  std::vector<std::vector<int>> out(vertex_count);
  for (std::size_t e = 0; e < hyperedges.size(); ++e) {
    for (int v : hyperedges[e]) out[v].push_back(static_cast<int>(e));
  }
  return out;
}

int RefMap::vertex_of(const OptiNode* node) const {
  auto it = std::find(vertex_node.begin(), vertex_node.end(), node);
  if (it == vertex_node.end() || node == nullptr) throw ScopeError("node is not a vertex of this projection");
  return static_cast<int>(it - vertex_node.begin());
}

std::vector<std::vector<int>> SimpleGraph::adjacency() const {
  std::vector<std::vector<int>> adj(vertex_count);
  for (const Edge& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::pair<Hypergraph, RefMap> to_hypergraph(const OptiGraph& graph) {
  Hypergraph h;
  RefMap ref;
  ref.vertex_node = graph.all_nodes();
  const auto pos = node_positions(graph);
  h.vertex_count = static_cast<int>(ref.vertex_node.size());
  for (const OptiNode* n : ref.vertex_node) h.vertex_weights.push_back(std::max<int>(1, static_cast<int>(n->num_variables())));
  for (const OptiEdge* e : graph.all_edges()) {
    std::vector<int> verts;
    for (const OptiNode* n : e->nodes()) verts.push_back(pos.at(n));
    std::sort(verts.begin(), verts.end());
    h.hyperedges.push_back(std::move(verts));
    h.edge_weights.push_back(std::max<int>(1, static_cast<int>(e->link_constraints().size())));
    ref.hyperedge_edge.push_back(e);
  }
  return {std::move(h), std::move(ref)};
}

SimpleGraph clique_expansion(const Hypergraph& h) {
  std::map<std::pair<int, int>, double> weight;
  for (std::size_t e = 0; e < h.hyperedges.size(); ++e) {
    const auto& verts = h.hyperedges[e];
    for (std::size_t i = 0; i < verts.size(); ++i) {
      for (std::size_t j = i + 1; j < verts.size(); ++j) weight[{verts[i], verts[j]}] += h.edge_weights[e];
    }
  }
  SimpleGraph g;
  g.vertex_count = h.vertex_count;
  for (const auto& [uv, w] : weight) g.edges.push_back({uv.first, uv.second, w});
  return g;
}

std::pair<SimpleGraph, RefMap> to_clique_graph(const OptiGraph& graph) {
  auto [h, ref] = to_hypergraph(graph);
  return {clique_expansion(h), std::move(ref)};
}

std::pair<SimpleGraph, RefMap> to_bipartite_graph(const OptiGraph& graph) {
  auto [h, ref] = to_hypergraph(graph);
  SimpleGraph g;
  const int nv = h.vertex_count;
  g.vertex_count = nv + static_cast<int>(h.hyperedges.size());
  ref.vertex_edge.assign(nv, nullptr);
  for (std::size_t e = 0; e < h.hyperedges.size(); ++e) {
    ref.vertex_node.push_back(nullptr);
    ref.vertex_edge.push_back(ref.hyperedge_edge[e]);
    for (int v : h.hyperedges[e]) g.edges.push_back({v, nv + static_cast<int>(e), 1.0});
  }
  return {std::move(g), std::move(ref)};
}

bool SubgraphView::contains(const OptiNode* node) const {
  return std::find(nodes.begin(), nodes.end(), node) != nodes.end();
}

namespace {

void check_members(const OptiGraph& graph, const std::vector<const OptiNode*>& nodes) {
  for (const OptiNode* n : nodes) {
    if (!graph.contains(n)) {
      throw ScopeError("node '" + (n ? n->name() : std::string("<null>")) + "' is not part of graph '" +
                       graph.name() + "'");
    }
  }
}

}  // namespace

std::vector<const OptiEdge*> incident_edges(const OptiGraph& graph, const std::vector<const OptiNode*>& nodes) {
  check_members(graph, nodes);
  const std::unordered_set<const OptiNode*> in(nodes.begin(), nodes.end());
  std::vector<const OptiEdge*> out;
  for (const OptiEdge* e : graph.all_edges()) {
    bool inside = false, outside = false;
    for (const OptiNode* n : e->nodes()) (in.count(n) ? inside : outside) = true;
    if (inside && outside) out.push_back(e);
  }
  return out;
}

std::vector<const OptiNode*> neighborhood(const OptiGraph& graph, const std::vector<const OptiNode*>& nodes,
                                          int distance) {
  if (distance < 0) throw ParameterError("neighborhood distance must be >= 0, got " + std::to_string(distance));
  check_members(graph, nodes);
  auto [h, ref] = to_hypergraph(graph);
  const auto pos = node_positions(graph);
  const auto vertex_edges = h.vertex_edges();
  std::vector<char> seen(h.vertex_count, 0);
  std::vector<int> frontier;
  for (const OptiNode* n : nodes) {
    const int v = pos.at(n);
    if (!seen[v]) {
      seen[v] = 1;
      frontier.push_back(v);
    }
  }
  for (int d = 0; d < distance && !frontier.empty(); ++d) {
    std::vector<int> next;
    for (int v : frontier) {
      for (int e : vertex_edges[v]) {
        for (int u : h.hyperedges[e]) {
          if (!seen[u]) {
            seen[u] = 1;
            next.push_back(u);
          }
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<const OptiNode*> out;
  for (int v = 0; v < h.vertex_count; ++v) {
    if (seen[v]) out.push_back(ref.vertex_node[v]);
  }
  return out;
}

SubgraphView make_view(const OptiGraph& graph, const std::vector<const OptiNode*>& nodes) {
  check_members(graph, nodes);
  const std::unordered_set<const OptiNode*> in(nodes.begin(), nodes.end());
  SubgraphView view;
  for (const OptiNode* n : graph.all_nodes()) {
    if (in.count(n)) view.nodes.push_back(n);
  }
  for (const OptiEdge* e : graph.all_edges()) {
    if (std::all_of(e->nodes().begin(), e->nodes().end(), [&](const OptiNode* n) { return in.count(n) != 0; })) {
      view.edges.push_back(e);
    }
  }
  return view;
}

SubgraphView make_view(const OptiGraph& graph, const OptiGraph& subgraph) {
  return make_view(graph, subgraph.all_nodes());
}

SubgraphView expand(const OptiGraph& graph, const SubgraphView& view, int distance) {
  return make_view(graph, neighborhood(graph, view.nodes, distance));
}

SubgraphView expand(const OptiGraph& graph, const OptiGraph& subgraph, int distance) {
  return make_view(graph, neighborhood(graph, subgraph.all_nodes(), distance));
}

}  // namespace optigraph
