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

#include "fixtures.hpp"
#include "optigraph/error.hpp"
#include "optigraph/flat_qp.hpp"

namespace optigraph {
namespace {

using testing::example1;
using testing::example2;
using testing::example3;

TEST(Graph, NewGraphIsEmpty) {
  GraphPtr g = new_graph("g");
  EXPECT_EQ(g->name(), "g");
  EXPECT_TRUE(g->all_nodes().empty());
  EXPECT_TRUE(g->all_edges().empty());
  EXPECT_TRUE(g->subgraphs().empty());
  GraphPtr unnamed = new_graph("");
  EXPECT_EQ(unnamed->name(), "");
}

TEST(Graph, GraphsAreIndependent) {
  GraphPtr a = new_graph("a");
  GraphPtr b = new_graph("b");
  a->add_node();
  EXPECT_EQ(a->num_local_nodes(), 1u);
  EXPECT_EQ(b->num_local_nodes(), 0u);
}

TEST(Graph, AddNodeOnSubgraphCountsRecursively) {
  GraphPtr parent = new_graph("p");
  GraphPtr child = new_graph("c");
  parent->add_subgraph(child);
  child->add_node();
  EXPECT_EQ(parent->all_nodes().size(), 1u);
  EXPECT_EQ(parent->num_local_nodes(), 0u);
  EXPECT_EQ(child->local_node(0).name(), "c_n0");
}

TEST(Graph, ManyNodesKeepStableReferences) {
  GraphPtr g = new_graph("big");
  const OptiNode* first = &g->add_node("first");
  for (int i = 0; i < 100000; ++i) g->add_node();
  EXPECT_EQ(g->num_local_nodes(), 100001u);
  EXPECT_EQ(&g->local_node(0), first);
}

TEST(Node, VariableBoundsAndStart) {
  GraphPtr g = new_graph("g");
  OptiNode& n = g->add_node("n1");
  VarRef y = n.add_variable("y", 2.0);
  EXPECT_EQ(n.variables()[y.index].lower, 2.0);
  EXPECT_EQ(n.variables()[y.index].start, 2.0);  // 0 clamped into [2, inf)
  VarRef x = n.add_variable("x", 0.0, 0.0, 0.0);
  EXPECT_EQ(n.variables()[x.index].upper, 0.0);
  EXPECT_THROW(n.add_variable("bad", 1.0, -1.0), BoundError);
  EXPECT_THROW(n.add_variable("x"), ModelError);
  EXPECT_EQ(n.add_variable("").index, 2u);
  EXPECT_EQ(n.variables()[2].name, "v2");
}

TEST(Node, ConstraintsMustBeLocal) {
  GraphPtr g = new_graph("g");
  OptiNode& a = g->add_node("a");
  OptiNode& b = g->add_node("b");
  VarRef xa = a.add_variable("x");
  VarRef xb = b.add_variable("x");
  EXPECT_THROW(a.add_constraint(LinExpr(xa) + xb <= 1.0), ScopeError);
  EXPECT_THROW(a.set_objective(square(LinExpr(xb))), ScopeError);
  EXPECT_THROW(a.add_constraint(LinExpr(xa) - xa == 1.0), ModelError);
  a.add_constraint(2.0 * LinExpr(xa) + 1.0 <= 5.0);
  EXPECT_EQ(a.constraints()[0].rhs, 4.0);
  EXPECT_EQ(a.constraints()[0].sense, Sense::kLessEqual);
}

TEST(Expr, QuadraticPairsStoredOnce) {
  GraphPtr g = new_graph("g");
  OptiNode& n = g->add_node("n");
  VarRef x = n.add_variable("x");
  VarRef y = n.add_variable("y");
  QuadExpr q = LinExpr(x) * LinExpr(y) + LinExpr(y) * LinExpr(x) + square(LinExpr(x) + 1.0);
  ASSERT_EQ(q.quadratic_terms().size(), 2u);
  EXPECT_EQ(q.quadratic_terms()[0].coef, 2.0);
  EXPECT_EQ(q.quadratic_terms()[1].coef, 1.0);
  EXPECT_EQ(q.constant(), 1.0);
  auto val = [&](VarRef v) { return v.index == 0 ? 2.0 : 3.0; };
  EXPECT_DOUBLE_EQ(q.evaluate(val), 2 * 6.0 + 9.0);
}

TEST(Link, CreatesOneHyperedgePerNodeSet) {
  GraphPtr g = example1();
  ASSERT_EQ(g->num_local_edges(), 1u);
  EXPECT_EQ(g->local_edge(0).nodes().size(), 3u);
  const OptiNode& n1 = g->local_node(0);
  const OptiNode& n2 = g->local_node(1);
  g->add_link_constraint(LinExpr(n1["x"]) <= LinExpr(n2["x"]) + 1.0);
  g->add_link_constraint(LinExpr(n2["y"]) - n1["y"] >= 0.0);
  EXPECT_EQ(g->num_local_edges(), 2u);
  EXPECT_EQ(g->local_edge(1).link_constraints().size(), 2u);
  EXPECT_THROW(g->add_link_constraint(LinExpr(n1["x"]) + n1["y"] == 1.0), EdgeArityError);
}

TEST(Link, UnreachableAndMisplacedLinksRejected) {
  GraphPtr g = example2();
  GraphPtr other = new_graph("other");
  OptiNode& stray = other->add_node("stray");
  VarRef s = stray.add_variable("x");
  const OptiNode* n1 = g->all_nodes()[0];
  EXPECT_THROW(g->add_link_constraint(LinExpr(s) + (*n1)["x"] == 0.0), ScopeError);
  const OptiNode* n2 = g->all_nodes()[1];
  // Both nodes live in graph1, so the link belongs there.
  EXPECT_THROW(g->add_link_constraint(LinExpr((*n1)["x"]) + (*n2)["x"] == 0.0), ScopeError);
}

TEST(Hierarchy, ExampleTwoCounts) {
  GraphPtr g = example2();
  GraphElements local = g->query_elements(Scope::kLocal);
  EXPECT_EQ(local.nodes.size(), 0u);
  EXPECT_EQ(local.edges.size(), 1u);
  EXPECT_EQ(local.subgraphs.size(), 3u);
  GraphElements all = g->query_elements(Scope::kRecursive);
  EXPECT_EQ(all.nodes.size(), 9u);
  EXPECT_EQ(all.edges.size(), 4u);
  EXPECT_EQ(all.nodes[0]->name(), "n1");
  EXPECT_EQ(all.nodes[8]->name(), "n9");
  // Subgraph edges come before the global edge.
  EXPECT_EQ(all.edges.back(), &g->local_edge(0));
  EXPECT_TRUE(new_graph("e")->query_elements(Scope::kRecursive).nodes.empty());
}

TEST(Hierarchy, RecursiveCountIsSumOfLocalCounts) {
  GraphPtr g = example3();
  std::size_t total = g->num_local_nodes();
  for (const OptiGraph* sub : g->all_subgraphs()) total += sub->num_local_nodes();
  EXPECT_EQ(total, g->all_nodes().size());
  EXPECT_EQ(total, 10u);
}

TEST(Hierarchy, CyclesAndDoubleAttachmentRejected) {
  GraphPtr a = new_graph("a");
  GraphPtr b = new_graph("b");
  GraphPtr c = new_graph("c");
  EXPECT_THROW(a->add_subgraph(a), HierarchyError);
  a->add_subgraph(b);
  EXPECT_THROW(b->add_subgraph(a), HierarchyError);
  EXPECT_THROW(c->add_subgraph(b), HierarchyError);
  GraphPtr empty = new_graph("empty");
  c->add_subgraph(empty);
  EXPECT_TRUE(c->all_nodes().empty());
  EXPECT_THROW(c->add_subgraph(nullptr), HierarchyError);
}

TEST(Hierarchy, RevisionTracksDescendantChanges) {
  GraphPtr g = example2();
  const auto before = g->revision();
  const_cast<OptiNode*>(g->all_nodes()[4])->add_variable("z");
  EXPECT_GT(g->revision(), before);
}

TEST(Hierarchy, EdgeNodeSetMatchesItsLinks) {
  GraphPtr g = example3();
  for (const OptiEdge* e : g->all_edges()) {
    std::vector<const OptiNode*> seen;
    for (const auto& link : e->link_constraints()) {
      for (const auto& [v, c] : link.terms) {
        if (std::find(seen.begin(), seen.end(), v.node) == seen.end()) seen.push_back(v.node);
      }
    }
    EXPECT_EQ(seen.size(), e->nodes().size());
    for (const OptiNode* n : seen) EXPECT_TRUE(e->contains(n));
  }
}

TEST(Flatten, ExampleOneLayout) {
  GraphPtr g = example1();
  FlatQP qp = flatten(*g);
  EXPECT_EQ(qp.num_variables(), 6);
  EXPECT_EQ(qp.num_in(), 3);
  EXPECT_EQ(qp.num_eq(), 1);
  EXPECT_EQ(qp.eq_rows[0].kind, RowSource::Kind::kLink);
  EXPECT_EQ(qp.lower[0], 2.0);  // y on n1
  EXPECT_EQ(qp.lower[1], 0.0);
  EXPECT_EQ(qp.hessian.nonZeros(), 0);
  EXPECT_EQ(qp.cost.sum(), 3.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(qp.in_lower[i], 3.0);
    EXPECT_EQ(qp.in_upper[i], kInfinity);
  }
}

TEST(Flatten, SingleNodeLp) {
  GraphPtr g = new_graph("lp");
  OptiNode& n = g->add_node("n");
  VarRef x = n.add_variable("x");
  VarRef y = n.add_variable("y");
  n.add_constraint(LinExpr(x) + y >= 3.0);
  n.set_objective(QuadExpr(LinExpr(y)));
  FlatQP qp = flatten(*g);
  EXPECT_EQ(qp.num_variables(), 2);
  EXPECT_EQ(qp.hessian.nonZeros(), 0);
  EXPECT_EQ(qp.num_in(), 1);
}

TEST(Flatten, RowsNodeFirstThenLinksInRecursiveOrder) {
  GraphPtr g = example2();
  FlatQP qp = flatten(*g);
  EXPECT_EQ(qp.num_variables(), 18);
  EXPECT_EQ(qp.num_in(), 9);
  ASSERT_EQ(qp.num_eq(), 4);
  EXPECT_EQ(qp.eq_rows.back().edge, &g->local_edge(0));
  EXPECT_EQ(qp.b_eq[3], 10.0);
  for (int i = 0; i < qp.num_variables(); ++i) EXPECT_EQ(qp.index_of(qp.var_map[i]), i);
}

TEST(Flatten, HessianConvention) {
  GraphPtr g = new_graph("h");
  OptiNode& n = g->add_node("n");
  VarRef x = n.add_variable("x");
  VarRef y = n.add_variable("y");
  n.set_objective(3.0 * square(LinExpr(x)) + LinExpr(x) * LinExpr(y) + 2.0 * square(LinExpr(y)));
  FlatQP qp = flatten(*g);
  Eigen::MatrixXd h(qp.hessian);
  EXPECT_EQ(h(0, 0), 6.0);
  EXPECT_EQ(h(0, 1), 1.0);
  EXPECT_EQ(h(1, 0), 1.0);
  EXPECT_EQ(h(1, 1), 4.0);
  Eigen::VectorXd p(2);
  p << 1.0, 2.0;
  EXPECT_DOUBLE_EQ(qp.objective(p), 3.0 + 2.0 + 8.0);
}

TEST(Flatten, NonConvexNodeNamed) {
  GraphPtr g = new_graph("nc");
  OptiNode& n = g->add_node("bad");
  VarRef x = n.add_variable("x");
  VarRef y = n.add_variable("y");
  n.set_objective(square(LinExpr(x)) + 3.0 * LinExpr(x) * LinExpr(y) + square(LinExpr(y)));
  try {
    flatten(*g);
    FAIL() << "expected ConvexityError";
  } catch (const ConvexityError& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
  OptiNode& m = g->add_node("neg");
  m.set_objective(-1.0 * square(LinExpr(m.add_variable("z"))));
  EXPECT_THROW(flatten(*g), ConvexityError);
}

TEST(Flatten, DeterministicForIdenticalBuilds) {
  FlatQP a = flatten(*example3());
  FlatQP b = flatten(*example3());
  EXPECT_TRUE(Eigen::MatrixXd(a.a_eq).isApprox(Eigen::MatrixXd(b.a_eq), 0.0));
  EXPECT_EQ(a.b_eq, b.b_eq);
  EXPECT_EQ(a.cost, b.cost);
}

TEST(Reform, PartitionMovesNodesAndEdges) {
  GraphPtr g = testing::path_graph(6);
  g->reform_subgraphs({0, 0, 0, 1, 1, 1}, 2);
  ASSERT_EQ(g->subgraphs().size(), 2u);
  EXPECT_EQ(g->subgraphs()[0]->name(), "path_part0");
  EXPECT_EQ(g->subgraphs()[0]->num_local_nodes(), 3u);
  EXPECT_EQ(g->subgraphs()[0]->num_local_edges(), 2u);
  EXPECT_EQ(g->num_local_edges(), 1u);
  EXPECT_EQ(g->all_nodes().size(), 6u);
  const OptiNode* n4 = g->all_nodes()[3];
  EXPECT_EQ(n4->graph(), g->subgraphs()[1].get());
}

}  // namespace
}  // namespace optigraph
