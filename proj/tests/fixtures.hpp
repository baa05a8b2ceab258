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

// Small graphs shared by the test suites.

#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "optigraph/model.hpp"

namespace optigraph::testing {

// n: x >= 0, y (>= ylow when given), x + y >= rhs, min y.
inline OptiNode& xy_node(OptiGraph& g, const std::string& name, std::optional<double> ylow, double rhs) {
  OptiNode& n = g.add_node(name);
  VarRef y = ylow ? n.add_variable("y", *ylow) : n.add_variable("y");
  VarRef x = n.add_variable("x", 0.0);
  n.add_constraint(LinExpr(x) + y >= rhs);
  n.set_objective(QuadExpr(LinExpr(y)));
  return n;
}

// Three nodes coupled by x1 + x2 + x3 = 3.
inline GraphPtr example1() {
  GraphPtr g = new_graph("graph1");
  OptiNode& n1 = xy_node(*g, "n1", 2.0, 3.0);
  OptiNode& n2 = xy_node(*g, "n2", std::nullopt, 3.0);
  OptiNode& n3 = xy_node(*g, "n3", std::nullopt, 3.0);
  g->add_link_constraint(LinExpr(n1["x"]) + n2["x"] + n3["x"] == 3.0);
  return g;
}

inline GraphPtr three_node_graph(const std::string& name, int first, double rhs) {
  GraphPtr g = new_graph(name);
  std::vector<OptiNode*> nodes;
  for (int i = 0; i < 3; ++i) nodes.push_back(&xy_node(*g, "n" + std::to_string(first + i), 2.0, rhs));
  g->add_link_constraint(LinExpr((*nodes[0])["x"]) + (*nodes[1])["x"] + (*nodes[2])["x"] == rhs);
  return g;
}

// Three subgraphs plus a global link over n3, n5, n7.
inline GraphPtr example2() {
  GraphPtr g0 = new_graph("graph0");
  GraphPtr g1 = example1();
  GraphPtr g2 = three_node_graph("graph2", 4, 5.0);
  GraphPtr g3 = three_node_graph("graph3", 7, 7.0);
  g0->add_subgraph(g1);
  g0->add_subgraph(g2);
  g0->add_subgraph(g3);
  const OptiNode& n3 = g1->local_node(2);
  const OptiNode& n5 = g2->local_node(1);
  const OptiNode& n7 = g3->local_node(0);
  g0->add_link_constraint(LinExpr(n3["x"]) + n5["x"] + n7["x"] == 10.0);
  return g0;
}

// The same subgraphs coupled through a global node n0.
inline GraphPtr example3() {
  GraphPtr g0 = new_graph("graph0");
  OptiNode& n0 = g0->add_node("n0");
  VarRef x0 = n0.add_variable("x");
  n0.add_constraint(LinExpr(x0) >= 0.0);
  GraphPtr g1 = example1();
  GraphPtr g2 = three_node_graph("graph2", 4, 5.0);
  GraphPtr g3 = three_node_graph("graph3", 7, 7.0);
  g0->add_subgraph(g1);
  g0->add_subgraph(g2);
  g0->add_subgraph(g3);
  g0->add_link_constraint(LinExpr(x0) + g1->local_node(2)["x"] == 3.0);
  g0->add_link_constraint(LinExpr(x0) + g2->local_node(1)["x"] == 5.0);
  g0->add_link_constraint(LinExpr(x0) + g3->local_node(0)["x"] == 7.0);
  return g0;
}

// Path of `n` nodes with one variable each and pairwise links x_i = x_{i+1}.
inline GraphPtr path_graph(int n) {
  GraphPtr g = new_graph("path");
  for (int i = 0; i < n; ++i) {
    OptiNode& node = g->add_node("n" + std::to_string(i + 1));
    VarRef x = node.add_variable("x");
    node.set_objective(square(LinExpr(x) - static_cast<double>(i)));
  }
  for (int i = 0; i + 1 < n; ++i) {
    g->add_link_constraint(LinExpr(g->local_node(i)["x"]) == LinExpr(g->local_node(i + 1)["x"]));
  }
  return g;
}

// Random convex block QP: each node has a diagonal-plus-rank-one PSD
// objective, random bounds and a few local rows; links are random sparse
// equalities and inequalities between node pairs. Built to be feasible at a
// random interior point.
inline GraphPtr random_block_qp(std::mt19937_64& rng, int max_nodes = 10, int max_vars = 10, int max_links = 8) {
  std::uniform_int_distribution<int> node_count(2, max_nodes);
  std::uniform_int_distribution<int> var_count(1, max_vars);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  GraphPtr g = new_graph("rand");
  const int nn = node_count(rng);
  std::vector<std::vector<double>> point(nn);
  for (int i = 0; i < nn; ++i) {
    OptiNode& node = g->add_node("n" + std::to_string(i));
    const int nv = var_count(rng);
    QuadExpr obj;
    LinExpr rank_one;
    for (int j = 0; j < nv; ++j) {
      const double p = 2.0 * unit(rng);
      point[i].push_back(p);
      const int kind = static_cast<int>(rng() % 4);
      double lo = -kInfinity, hi = kInfinity;
      if (kind == 1 || kind == 3) lo = p - pos(rng);
      if (kind == 2 || kind == 3) hi = p + pos(rng);
      VarRef v = node.add_variable("x" + std::to_string(j), lo, hi);
      obj += pos(rng) * square(LinExpr(v)) + unit(rng) * LinExpr(v);
      rank_one.add_term(v, unit(rng));
    }
    obj += 0.5 * square(rank_one);
    node.set_objective(obj);
    const int rows = static_cast<int>(rng() % 3);
    for (int r = 0; r < rows && nv > 1; ++r) {
      LinExpr e;
      double val = 0.0;
      for (int j = 0; j < nv; ++j) {
        if (rng() % 2 == 0 && j != 0) continue;
        const double a = unit(rng);
        e.add_term(node.variable(static_cast<std::size_t>(j)), a);
        val += a * point[i][j];
      }
      if (r == 0) {
        node.add_constraint(e == val);
      } else {
        node.add_constraint(e <= val + pos(rng));
      }
    }
  }
  std::uniform_int_distribution<int> link_count(0, max_links);
  const int nl = link_count(rng);
  for (int l = 0; l < nl; ++l) {
    const int a = static_cast<int>(rng() % nn);
    int b = static_cast<int>(rng() % nn);
    if (a == b) b = (a + 1) % nn;
    const int va = static_cast<int>(rng() % point[a].size());
    const int vb = static_cast<int>(rng() % point[b].size());
    const double ca = unit(rng), cb = unit(rng);
    LinExpr e = ca * LinExpr(g->local_node(a).variable(va)) + cb * LinExpr(g->local_node(b).variable(vb));
    const double val = ca * point[a][va] + cb * point[b][vb];
    if (l % 3 == 2) {
      g->add_link_constraint(e >= val - pos(rng));
    } else {
      g->add_link_constraint(e == val);
    }
  }
  return g;
}

}  // namespace optigraph::testing
