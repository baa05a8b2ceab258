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

#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "optigraph/model.hpp"

namespace optigraph {

struct Hypergraph {
  int vertex_count = 0;
  std::vector<std::vector<int>> hyperedges;  // sorted vertex ids
  std::vector<int> vertex_weights;           // s(n)
  std::vector<int> edge_weights;             // w(e)

  // |V| x |E| 0/1 matrix.
  Eigen::SparseMatrix<double> incidence() const;
  // Hyperedges incident to each vertex.
  std::vector<std::vector<int>> vertex_edges() const;
};

// Links projection vertices and hyperedges back to graph elements. In a
// bipartite projection edge vertices map to a null node.
struct RefMap {
  std::vector<const OptiNode*> vertex_node;
  std::vector<const OptiEdge*> vertex_edge;  // bipartite only
  std::vector<const OptiEdge*> hyperedge_edge;

  int vertex_of(const OptiNode* node) const;
};

struct SimpleGraph {
  int vertex_count = 0;
  struct Edge {
    int u;
    int v;
    double weight;
  };
  std::vector<Edge> edges;  // u < v, no duplicates

  std::vector<std::vector<int>> adjacency() const;
};

// Vertices are all_nodes() in order, hyperedges all_edges() in order.
std::pair<Hypergraph, RefMap> to_hypergraph(const OptiGraph& graph);
std::pair<SimpleGraph, RefMap> to_clique_graph(const OptiGraph& graph);
// Node vertices first, then one vertex per edge.
std::pair<SimpleGraph, RefMap> to_bipartite_graph(const OptiGraph& graph);

SimpleGraph clique_expansion(const Hypergraph& h);

// A node set of a graph together with the edges fully supported by it.
// Nodes and edges keep the graph's recursive order.
struct SubgraphView {
  std::vector<const OptiNode*> nodes;
  std::vector<const OptiEdge*> edges;

  bool contains(const OptiNode* node) const;
};

// Edges touching `nodes` that also touch a node outside of it.
std::vector<const OptiEdge*> incident_edges(const OptiGraph& graph, const std::vector<const OptiNode*>& nodes);

// All nodes within `distance` hops of `nodes` in the clique projection,
// returned in the graph's node order.
std::vector<const OptiNode*> neighborhood(const OptiGraph& graph, const std::vector<const OptiNode*>& nodes,
                                          int distance);

SubgraphView make_view(const OptiGraph& graph, const std::vector<const OptiNode*>& nodes);
// View over the subgraph's recursive nodes.
SubgraphView make_view(const OptiGraph& graph, const OptiGraph& subgraph);
SubgraphView expand(const OptiGraph& graph, const SubgraphView& view, int distance);
SubgraphView expand(const OptiGraph& graph, const OptiGraph& subgraph, int distance);

}  // namespace optigraph
