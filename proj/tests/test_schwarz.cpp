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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "optigraph/error.hpp"
#include "optigraph/models.hpp"
#include "optigraph/partition.hpp"
#include "optigraph/schwarz.hpp"

namespace optigraph {
namespace {

using testing::path_graph;

bool same_columns(const FlatQP& a, const FlatQP& b) {
  if (a.var_map.size() != b.var_map.size()) return false;
  for (std::size_t i = 0; i < a.var_map.size(); ++i) {
    if (!same_variable(a.var_map[i], b.var_map[i])) return false;
  }
  return true;
}

std::vector<const OptiNode*> nodes_of(const OptiGraph& g, std::initializer_list<int> ids) {
  std::vector<const OptiNode*> out;
  for (int i : ids) out.push_back(&g.local_node(i));
  return out;
}

// Six-node path split in halves and expanded by one hop on each side, so
// the overlap is n3, n4.
struct PathSetup {
  GraphPtr g = path_graph(6);
  std::vector<SubgraphView> original;
  std::vector<SubgraphView> expanded;
  std::vector<LinkRef> links;

  PathSetup() {
    original = {make_view(*g, nodes_of(*g, {0, 1, 2})), make_view(*g, nodes_of(*g, {3, 4, 5}))};
    for (const auto& v : original) expanded.push_back(expand(*g, v, 1));
    links = g->all_link_constraints();
  }
};

GraphPtr partitioned_dynamic(int k) {
  GraphPtr g = build_dynamic_model(sine_disturbance(100));
  apply_partition(*g, partition_graph(*g, k, 0.1));
  return g;
}

TEST(Classify, PathOverlapFollowsOverrides) {
  PathSetup s;
  ASSERT_EQ(s.expanded[0].nodes.size(), 4u);
  ASSERT_EQ(s.expanded[1].nodes.size(), 4u);
  SchwarzOptions opts;
  opts.set_treatment(s.links[1], LinkTreatment::kPrimal);  // n2 - n3
  auto inc = classify_links(*s.g, s.expanded, opts);
  // The first expanded subgraph ends at n4, so only n4 - n5 is incident.
  ASSERT_EQ(inc[0].dual.size(), 1u);
  EXPECT_EQ(inc[0].dual[0], s.links[3]);
  EXPECT_TRUE(inc[0].primal.empty());
  ASSERT_EQ(inc[1].primal.size(), 1u);
  EXPECT_EQ(inc[1].primal[0], s.links[1]);
  EXPECT_TRUE(inc[1].dual.empty());
}

TEST(Classify, DefaultIsDual) {
  PathSetup s;
  auto inc = classify_links(*s.g, s.expanded, {});
  for (const auto& i : inc) {
    EXPECT_EQ(i.dual.size(), 1u);
    EXPECT_TRUE(i.primal.empty());
  }
}

TEST(Classify, OwnerSplitsBySide) {
  PathSetup s;
  SchwarzOptions opts;
  opts.default_treatment = LinkTreatment::kOwner;
  auto inc = classify_links(*s.g, s.expanded, opts);
  // n4 - n5 starts at n4, which the first expanded subgraph holds.
  ASSERT_EQ(inc[0].primal.size(), 1u);
  EXPECT_EQ(inc[0].primal[0], s.links[3]);
  ASSERT_EQ(inc[1].dual.size(), 1u);
  EXPECT_EQ(inc[1].dual[0], s.links[1]);
}

TEST(Classify, InteriorSubgraphHasNoIncidentLinks) {
  GraphPtr g = path_graph(4);
  const OptiGraph& cg = *g;
  auto inc = classify_links(cg, {make_view(cg, cg.all_nodes())}, {});
  EXPECT_TRUE(inc[0].dual.empty());
  EXPECT_TRUE(inc[0].primal.empty());
}

TEST(Classify, ForeignOverrideThrows) {
  PathSetup s;
  GraphPtr other = path_graph(3);
  SchwarzOptions opts;
  opts.set_treatment(other->all_link_constraints()[0], LinkTreatment::kPrimal);
  EXPECT_THROW(classify_links(*s.g, s.expanded, opts), ClassificationError);
}

TEST(Subproblem, MissingCacheEntryThrows) {
  PathSetup s;
  SchwarzState st = init_state(*s.g, s.original, s.expanded, {});
  st.primal.erase(s.g->local_node(4)["x"]);
  EXPECT_THROW(build_subproblem(st, 0), StateError);
  st = init_state(*s.g, s.original, s.expanded, {});
  st.duals.clear();
  EXPECT_THROW(build_subproblem(st, 1), StateError);
}

TEST(Subproblem, ZeroPenaltyIsPlainRestriction) {
  PathSetup s;
  SchwarzState st = init_state(*s.g, s.original, s.expanded, {});
  FlatQP sub = build_subproblem(st, 0);
  QPAssembler a;
  for (const OptiNode* n : s.expanded[0].nodes) a.add_node(*n);
  for (const OptiEdge* e : s.expanded[0].edges) a.add_link(*e, 0);
  FlatQP plain = a.finish();
  EXPECT_TRUE(same_columns(sub, plain));
  EXPECT_EQ(sub.cost, plain.cost);
  EXPECT_EQ(sub.constant, plain.constant);
  EXPECT_EQ(Eigen::MatrixXd(sub.hessian), Eigen::MatrixXd(plain.hessian));
  EXPECT_EQ(Eigen::MatrixXd(sub.a_eq), Eigen::MatrixXd(plain.a_eq));
}

TEST(Subproblem, DualPenaltyFoldsExternals) {
  PathSetup s;
  SchwarzState st = init_state(*s.g, s.original, s.expanded, {});
  const VarRef x5 = s.g->local_node(4)["x"];
  st.primal[x5] = 2.0;
  st.duals[key_of(s.links[3])] = 0.5;
  // 0.5 * (x4 - x5) with x5 = 2: cost +0.5 on x4, constant -1.
  FlatQP sub = build_subproblem(st, 0);
  FlatQP base = build_subproblem(init_state(*s.g, s.original, s.expanded, {}), 0);
  const int i4 = sub.index_of(s.g->local_node(3)["x"]);
  EXPECT_DOUBLE_EQ(sub.cost[i4] - base.cost[i4], 0.5);
  EXPECT_DOUBLE_EQ(sub.constant - base.constant, -1.0);
}

TEST(Subproblem, PrimalLinkFixesExternals) {
  PathSetup s;
  SchwarzOptions opts;
  opts.set_treatment(s.links[1], LinkTreatment::kPrimal);
  SchwarzState st = init_state(*s.g, s.original, s.expanded, opts);
  st.primal[s.g->local_node(1)["x"]] = 3.0;
  FlatQP sub = build_subproblem(st, 1);
  Solution sol = solve_monolithic(sub);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.value(s.g->local_node(2)["x"]), 3.0, 1e-7);
}

TEST(SchwarzResiduals, ZeroStartOnDynamicModel) {
  GraphPtr g = partitioned_dynamic(8);
  auto orig = original_subgraphs(*g);
  std::vector<SubgraphView> ex;
  for (const auto& v : orig) ex.push_back(expand(*g, v, 2));
  SchwarzState st = init_state(*g, orig, ex, {});
  double expect = 0.0;
  for (int t = 1; t < 100; ++t) expect = std::max(expect, std::abs(std::sin(static_cast<double>(t))));
  const SchwarzResiduals r = residuals(*g, st);
  EXPECT_NEAR(r.primal, expect, 1e-12);
  EXPECT_EQ(r.dual, 0.0);
}

TEST(Schwarz, SingleSubgraphTakesOneIteration) {
  GraphPtr g = build_dynamic_model(sine_disturbance(20));
  const double mono = solve_monolithic(flatten(*g)).objective;
  SchwarzResult r = schwarz_solve(*g);
  ASSERT_TRUE(r.converged());
  EXPECT_EQ(r.solution.iterations, 1);
  EXPECT_NEAR(r.solution.objective, mono, 1e-8 * std::abs(mono));
  EXPECT_EQ(r.history.back().dual, 0.0);
}

TEST(Schwarz, DynamicModelMatchesMonolithic) {
  GraphPtr g = partitioned_dynamic(8);
  const Solution mono = solve_monolithic(flatten(*g));
  SchwarzOptions opts;
  opts.overlap = 2;
  SchwarzResult r = schwarz_solve(*g, opts);
  ASSERT_TRUE(r.converged());
  EXPECT_LE(r.history.back().primal, 1e-6);
  EXPECT_LE(r.history.back().dual, 1e-6);
  EXPECT_NEAR(r.solution.objective, mono.objective, 1e-4 * std::abs(mono.objective));
  ASSERT_EQ(r.solution.x.size(), mono.x.size());
  EXPECT_TRUE(same_columns(*r.solution.qp, *mono.qp));
}

TEST(Schwarz, MoreOverlapNeedsNoMoreIterations) {
  GraphPtr g = partitioned_dynamic(8);
  SchwarzOptions opts;
  opts.overlap = 2;
  const int it2 = schwarz_solve(*g, opts).solution.iterations;
  opts.overlap = 4;
  SchwarzResult r4 = schwarz_solve(*g, opts);
  ASSERT_TRUE(r4.converged());
  EXPECT_LE(r4.solution.iterations, it2);
}

TEST(Schwarz, MonolithicOptimumIsFixedPoint) {
  GraphPtr g = partitioned_dynamic(8);
  const Solution mono = solve_monolithic(flatten(*g));
  SchwarzOptions opts;
  opts.overlap = 2;
  opts.warm_start = &mono;
  SchwarzResult r = schwarz_solve(*g, opts);
  ASSERT_TRUE(r.converged());
  EXPECT_EQ(r.solution.iterations, 1);
  EXPECT_LE((r.solution.x - mono.x).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(Schwarz, ThreadCountDoesNotChangeIterates) {
  GraphPtr g = partitioned_dynamic(8);
  SchwarzOptions opts;
  opts.overlap = 2;
  SchwarzResult a = schwarz_solve(*g, opts);
  opts.threads = 4;
  SchwarzResult b = schwarz_solve(*g, opts);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t k = 0; k < a.history.size(); ++k) {
    EXPECT_EQ(a.history[k].primal, b.history[k].primal);
    EXPECT_EQ(a.history[k].dual, b.history[k].dual);
  }
  EXPECT_EQ(a.solution.x, b.solution.x);
  EXPECT_EQ(a.solution.y_eq, b.solution.y_eq);
}

TEST(Schwarz, TraceIsCsv) {
  GraphPtr g = partitioned_dynamic(4);
  std::ostringstream out;
  SchwarzOptions opts;
  opts.overlap = 3;
  opts.trace = &out;
  SchwarzResult r = schwarz_solve(*g, opts);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iter,r_pr,r_du,seconds");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
    EXPECT_EQ(line.substr(0, line.find(',')), std::to_string(rows));
  }
  EXPECT_EQ(rows, r.solution.iterations);
}

TEST(Schwarz, IterationLimitKeepsHistory) {
  GraphPtr g = partitioned_dynamic(8);
  SchwarzOptions opts;
  opts.max_iter = 3;
  SchwarzResult r = schwarz_solve(*g, opts);
  EXPECT_EQ(r.solution.status, SolveStatus::kIterationLimit);
  EXPECT_EQ(r.history.size(), 3u);
}

TEST(Schwarz, SmallGridMatchesMonolithic) {
  GraphPtr g = build_dcopf_model(generate_grid_network(4, 4, 0));
  const double mono = solve_monolithic(flatten(*g)).objective;
  apply_partition(*g, partition_graph(*g, 4, 0.1));
  SchwarzOptions opts;
  opts.overlap = 6;
  opts.tol = 1e-4;
  opts.default_treatment = LinkTreatment::kOwner;
  SchwarzResult r = schwarz_solve(*g, opts);
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.solution.objective, mono, 1e-4 * mono);
}

TEST(Schwarz, InfeasibleSubproblemIsReported) {
  GraphPtr g = build_dcopf_model(generate_grid_network(4, 4, 0));
  apply_partition(*g, partition_graph(*g, 4, 0.1));
  SchwarzOptions opts;
  opts.overlap = 1;
  opts.default_treatment = LinkTreatment::kPrimal;
  SchwarzResult r = schwarz_solve(*g, opts);
  EXPECT_FALSE(r.converged());
  ASSERT_TRUE(r.failed_subgraph.has_value());
  EXPECT_EQ(r.solution.status, SolveStatus::kInfeasible);
}

TEST(Schwarz, RejectsBadInput) {
  GraphPtr g = partitioned_dynamic(2);
  SchwarzOptions opts;
  opts.overlap = -1;
  EXPECT_THROW(schwarz_solve(*g, opts), ParameterError);
  opts.overlap = 0;
  opts.tol = 0.0;
  EXPECT_THROW(schwarz_solve(*g, opts), ParameterError);
  EXPECT_THROW(original_subgraphs(*testing::example3()), StructureError);
  PathSetup s;
  EXPECT_THROW(init_state(*s.g, {s.original[0]}, {s.expanded[0]}, {}), StructureError);
  EXPECT_THROW(init_state(*s.g, s.original, {s.original[0], s.original[0]}, {}), StructureError);
}

}  // namespace
}  // namespace optigraph
