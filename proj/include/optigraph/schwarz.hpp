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


// Overlapping Schwarz decomposition over expanded subgraphs. Each iteration
// solves one QP per expanded subgraph with boundary values from the previous
// iteration (Jacobi), keeps the owner's part of every solution and
// exchanges primal values and link multipliers.

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "optigraph/qp_solver.hpp"
#include "optigraph/topology.hpp"

namespace optigraph {

// kDual relaxes an incident link into the objective with the cached
// multiplier; kPrimal keeps it as a constraint with external values fixed.
// kOwner is primal in subgraphs holding the node of the link's first term
// and dual elsewhere.
enum class LinkTreatment { kPrimal, kDual, kOwner };

using LinkKey = std::pair<const OptiEdge*, std::size_t>;

inline LinkKey key_of(const LinkRef& link) { return {link.edge, link.index}; }

struct SchwarzOptions {
  // Expansion distance used when expanded subgraphs are not supplied.
  int overlap = 0;
  double tol = 1e-6;
  int max_iter = 100;
  LinkTreatment default_treatment = LinkTreatment::kDual;
  std::map<LinkKey, LinkTreatment> overrides;
  int threads = 1;
  SolverOptions subproblem;
  // Abort when the primal residual grows past this factor of its start value.
  double divergence_factor = 1e6;
  // Optional start point: primal values and link multipliers of a solve of
  // flatten(graph). Variable start values and zero multipliers otherwise.
  const Solution* warm_start = nullptr;
  // Receives "iter,r_pr,r_du,seconds" lines when set.
  std::ostream* trace = nullptr;

  void set_treatment(const LinkRef& link, LinkTreatment t) { overrides[key_of(link)] = t; }
  void set_treatment(const std::vector<LinkRef>& links, LinkTreatment t) {
    for (const auto& l : links) set_treatment(l, t);
  }
};

struct IncidentLinks {
  std::vector<LinkRef> dual;    // relaxed with multipliers
  std::vector<LinkRef> primal;  // imposed with fixed externals
};

// Splits the links on the incident edges of each expanded subgraph. Throws
// ClassificationError when an override names a link outside of `graph`.
std::vector<IncidentLinks> classify_links(const OptiGraph& graph, const std::vector<SubgraphView>& expanded,
                                          const SchwarzOptions& opts);

// Top-level subgraphs as node sets, or the whole graph when it has none.
// Throws StructureError when nodes sit beside subgraphs at the top level.
std::vector<SubgraphView> original_subgraphs(const OptiGraph& graph);

struct SchwarzState {
  std::vector<SubgraphView> original;
  std::vector<SubgraphView> expanded;
  std::vector<IncidentLinks> incident;
  VarMap<double> primal;
  std::map<LinkKey, double> duals;
  // Multiplier estimates of the last iteration for links that cross
  // original subgraphs, one per subproblem holding the link as a row.
  std::map<LinkKey, std::vector<double>> cut_estimates;
};

// Validates the cover and fills the caches with the start point. Throws
// StructureError when the originals do not partition the nodes or an
// expanded subgraph misses its original.
SchwarzState init_state(const OptiGraph& graph, std::vector<SubgraphView> original,
                        std::vector<SubgraphView> expanded, const SchwarzOptions& opts);

// Subproblem of expanded subgraph `i` at the cached state. Throws
// StateError when a needed cache entry is missing.
FlatQP build_subproblem(const SchwarzState& state, int i);

struct SchwarzResiduals {
  double primal = 0.0;  // largest link violation at the cached iterate
  double dual = 0.0;    // largest spread of multiplier estimates on cut links
  double max() const { return primal > dual ? primal : dual; }
};

SchwarzResiduals residuals(const OptiGraph& graph, const SchwarzState& state);

struct SchwarzIteration {
  int iter = 0;
  double primal = 0.0;
  double dual = 0.0;
  double seconds = 0.0;
};

struct SchwarzResult {
  // Indexed like flatten(graph). Multipliers on cut links are the mean of
  // the subproblem estimates.
  Solution solution;
  std::vector<SchwarzIteration> history;
  bool diverged = false;
  std::optional<int> failed_subgraph;

  bool converged() const { return solution.optimal(); }
};

SchwarzResult schwarz_solve(const OptiGraph& graph, const SchwarzOptions& opts = {});
SchwarzResult schwarz_solve(const OptiGraph& graph, std::vector<SubgraphView> original,
                            std::vector<SubgraphView> expanded, const SchwarzOptions& opts = {});

}  // namespace optigraph
