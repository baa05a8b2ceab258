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

#include <gtest/gtest.h>

#include <set>
#include <utility>

#include "fixtures.hpp"
#include "optigraph/error.hpp"
#include "optigraph/models.hpp"
#include "optigraph/topology.hpp"

namespace optigraph {
namespace {

using testing::example2;
using testing::path_graph;

GraphPtr hyperedge_graph(int n, const std::vector<std::vector<int>>& edges) {
  GraphPtr g = new_graph("h");
  for (int i = 0; i < n; ++i) g->add_node().add_variable("x");
  for (const auto& e : edges) {
    LinExpr sum;
    for (int v : e) sum += g->local_node(v)["x"];
    g->add_link_constraint(sum == 0.0);
  }
  return g;
}

TEST(Hypergraph, DynamicModelCounts) {
  GraphPtr g = build_dynamic_model(sine_disturbance(100));
  auto [h, ref] = to_hypergraph(*g);
  EXPECT_EQ(h.vertex_count, 199);
  EXPECT_EQ(h.hyperedges.size(), 99u);
  for (int w : h.vertex_weights) EXPECT_EQ(w, 1);
  for (int w : h.edge_weights) EXPECT_EQ(w, 1);
}

TEST(Hypergraph, ExampleTwoGlobalEdge) {
  GraphPtr g = example2();
  auto [h, ref] = to_hypergraph(*g);
  EXPECT_EQ(h.vertex_count, 9);
  ASSERT_EQ(h.hyperedges.size(), 4u);
  EXPECT_EQ(ref.hyperedge_edge.back(), &g->local_edge(0));
  EXPECT_EQ(h.hyperedges.back(), (std::vector<int>{2, 4, 6}));
  EXPECT_EQ(h.vertex_weights[0], 2);
}

TEST(Hypergraph, IncidenceSums) {
  GraphPtr g = example2();
  auto [h, ref] = to_hypergraph(*g);
  Eigen::MatrixXd a(h.incidence());
  const auto vertex_edges = h.vertex_edges();
  for (std::size_t e = 0; e < h.hyperedges.size(); ++e) EXPECT_EQ(a.col(e).sum(), h.hyperedges[e].size());
  for (int v = 0; v < h.vertex_count; ++v) EXPECT_EQ(a.row(v).sum(), vertex_edges[v].size());
}

TEST(Clique, TriangleFromHyperedge) {
  auto [g, ref] = to_clique_graph(*hyperedge_graph(3, {{0, 1, 2}}));
  ASSERT_EQ(g.edges.size(), 3u);
  for (const auto& e : g.edges) EXPECT_EQ(e.weight, 1.0);
}

TEST(Clique, ParallelEdgesMerge) {
  auto [g, ref] = to_clique_graph(*hyperedge_graph(2, {{0, 1}, {0, 1}}));
  // Both links share one hyperedge of weight 2.
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].weight, 2.0);
  Hypergraph h;
  h.vertex_count = 2;
  h.hyperedges = {{0, 1}, {0, 1}};
  h.vertex_weights = {1, 1};
  h.edge_weights = {1, 1};
  SimpleGraph merged = clique_expansion(h);
  ASSERT_EQ(merged.edges.size(), 1u);
  EXPECT_EQ(merged.edges[0].weight, 2.0);
}

TEST(Clique, DynamicModelTriangles) {
  GraphPtr g = build_dynamic_model(sine_disturbance(5));
  auto [s, ref] = to_clique_graph(*g);
  // Each dynamics edge {x_t, x_t+1, u_t} is a triangle; consecutive triangles
  // share no pair, so there are 3 (T-1) edges.
  EXPECT_EQ(s.edges.size(), 12u);
  std::set<std::pair<int, int>> pairs;
  for (const auto& e : s.edges) pairs.insert({e.u, e.v});
  for (int t = 0; t < 4; ++t) {
    EXPECT_TRUE(pairs.count({t, t + 1}));
    EXPECT_TRUE(pairs.count({t, 5 + t}));
    EXPECT_TRUE(pairs.count({t + 1, 5 + t}));
  }
}

TEST(Bipartite, StarAndCounts) {
  auto [star, ref] = to_bipartite_graph(*hyperedge_graph(3, {{0, 1, 2}}));
  EXPECT_EQ(star.vertex_count, 4);
  EXPECT_EQ(star.edges.size(), 3u);
  EXPECT_EQ(ref.vertex_node[3], nullptr);
  EXPECT_NE(ref.vertex_edge[3], nullptr);
  auto [iso, ref2] = to_bipartite_graph(*hyperedge_graph(3, {}));
  EXPECT_EQ(iso.vertex_count, 3);
  EXPECT_TRUE(iso.edges.empty());
  auto [ex2, ref3] = to_bipartite_graph(*example2());
  EXPECT_EQ(ex2.vertex_count, 13);
  EXPECT_EQ(ex2.edges.size(), 12u);
}

TEST(Bipartite, IsBipartite) {
  auto [g, ref] = to_bipartite_graph(*example2());
  for (const auto& e : g.edges) {
    EXPECT_NE(ref.vertex_node[e.u] == nullptr, ref.vertex_node[e.v] == nullptr);
  }
}

TEST(Incident, BoundaryEdgesOnly) {
  GraphPtr g = path_graph(4);
  auto nodes = std::as_const(*g).all_nodes();
  auto inc = incident_edges(*g, {nodes[0], nodes[1]});
  ASSERT_EQ(inc.size(), 1u);
  EXPECT_EQ(inc[0], &g->local_edge(1));
  EXPECT_TRUE(incident_edges(*g, nodes).empty());
  GraphPtr ex = example2();
  auto inc2 = incident_edges(*ex, std::as_const(*ex->subgraphs()[0]).all_nodes());
  ASSERT_EQ(inc2.size(), 1u);
  EXPECT_EQ(inc2[0], &ex->local_edge(0));
  GraphPtr other = path_graph(2);
  EXPECT_THROW(incident_edges(*g, {std::as_const(*other).all_nodes()[0]}), ScopeError);
}

TEST(Neighborhood, PathDistances) {
  GraphPtr g = path_graph(4);
  auto nodes = std::as_const(*g).all_nodes();
  EXPECT_EQ(neighborhood(*g, {nodes[0]}, 1), (std::vector<const OptiNode*>{nodes[0], nodes[1]}));
  EXPECT_EQ(neighborhood(*g, {nodes[2]}, 0), (std::vector<const OptiNode*>{nodes[2]}));
  EXPECT_EQ(neighborhood(*g, {nodes[0]}, 10), nodes);
  EXPECT_THROW(neighborhood(*g, {nodes[0]}, -1), ParameterError);
}

TEST(Expand, ZeroIsIdentityAndEdgesFollowNodes) {
  GraphPtr g = path_graph(6);
  auto nodes = std::as_const(*g).all_nodes();
  SubgraphView v = make_view(*g, {nodes[1], nodes[2]});
  EXPECT_EQ(v.edges.size(), 1u);
  SubgraphView same = expand(*g, v, 0);
  EXPECT_EQ(same.nodes, v.nodes);
  EXPECT_EQ(same.edges, v.edges);
  SubgraphView wide = expand(*g, v, 2);
  EXPECT_EQ(wide.nodes.size(), 5u);
  EXPECT_EQ(wide.edges.size(), 4u);
}

TEST(Expand, DynamicPartitionOverlap) {
  GraphPtr g = build_dynamic_model(sine_disturbance(10));
  auto nodes = std::as_const(*g).all_nodes();
  // States 1..5 with controls 1..4, expanded by two hops.
  std::vector<const OptiNode*> part = {nodes[0], nodes[1], nodes[2], nodes[3], nodes[4],
                                       nodes[10], nodes[11], nodes[12], nodes[13]};
  SubgraphView ex = expand(*g, make_view(*g, part), 2);
  EXPECT_TRUE(ex.contains(nodes[6]));   // state 7
  EXPECT_FALSE(ex.contains(nodes[7]));  // state 8
  EXPECT_TRUE(ex.contains(nodes[15]));  // control 6
}

}  // namespace
}  // namespace optigraph
