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


#include "optigraph/schwarz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "optigraph/error.hpp"
#include "parallel.hpp"

namespace optigraph {

namespace {

double cached(const VarMap<double>& primal, const VarRef& v) {
  auto it = primal.find(v);
  if (it == primal.end()) throw StateError("no cached value for an external variable");
  return it->second;
}

std::vector<const OptiEdge*> links_in(const SubgraphView& view) { return view.edges; }

// Part owning each node of the original cover.
std::unordered_map<const OptiNode*, int> owners(const std::vector<SubgraphView>& original) {
  std::unordered_map<const OptiNode*, int> owner;
  for (std::size_t i = 0; i < original.size(); ++i) {
    for (const OptiNode* n : original[i].nodes) owner[n] = static_cast<int>(i);
  }
  return owner;
}

// Part holding every node of `edge`, or -1 for a cut edge.
int edge_owner(const OptiEdge& edge, const std::unordered_map<const OptiNode*, int>& owner) {
  const int first = owner.at(edge.nodes().front());
  for (const OptiNode* n : edge.nodes()) {
    if (owner.at(n) != first) return -1;
  }
  return first;
}

double link_violation(const LinkConstraint& link, const VarMap<double>& primal) {
  double lhs = 0.0;
  for (const auto& [v, coef] : link.terms) lhs += coef * cached(primal, v);
  return std::abs(constraint_violation(lhs, link.sense, link.rhs));
}

// Link rows of subproblem i: internal links, then primal incident links.
std::vector<LinkRef> subproblem_links(const SchwarzState& state, int i) {
  std::vector<LinkRef> out;
  for (const OptiEdge* e : state.expanded[i].edges) {
    for (std::size_t l = 0; l < e->link_constraints().size(); ++l) out.push_back({e, l});
  }
  for (const LinkRef& l : state.incident[i].primal) out.push_back(l);
  return out;
}

}  // namespace

std::vector<IncidentLinks> classify_links(const OptiGraph& graph, const std::vector<SubgraphView>& expanded,
                                          const SchwarzOptions& opts) {
  for (const auto& [key, t] : opts.overrides) {
    if (!key.first || !graph.contains(key.first) || key.second >= key.first->link_constraints().size()) {
      throw ClassificationError("treatment override names a link outside of the graph");
    }
  }
  std::vector<IncidentLinks> out(expanded.size());
  for (std::size_t i = 0; i < expanded.size(); ++i) {
    for (const OptiEdge* e : incident_edges(graph, expanded[i].nodes)) {
      for (std::size_t l = 0; l < e->link_constraints().size(); ++l) {
        auto it = opts.overrides.find({e, l});
        LinkTreatment t = it == opts.overrides.end() ? opts.default_treatment : it->second;
        if (t == LinkTreatment::kOwner) {
          const OptiNode* first = e->link_constraints()[l].terms.front().first.node;
          t = expanded[i].contains(first) ? LinkTreatment::kPrimal : LinkTreatment::kDual;
        }
        (t == LinkTreatment::kDual ? out[i].dual : out[i].primal).push_back({e, l});
      }
    }
  }
  return out;
}

std::vector<SubgraphView> original_subgraphs(const OptiGraph& graph) {
  if (graph.subgraphs().empty()) return {make_view(graph, graph.all_nodes())};
  if (graph.num_local_nodes() != 0) {
    throw StructureError("graph '" + graph.name() + "' has nodes outside of its subgraphs; partition it first");
  }
  std::vector<SubgraphView> out;
  for (const auto& sub : graph.subgraphs()) out.push_back(make_view(graph, *sub));
  return out;
}

SchwarzState init_state(const OptiGraph& graph, std::vector<SubgraphView> original,
                        std::vector<SubgraphView> expanded, const SchwarzOptions& opts) {
  if (opts.overlap < 0) throw ParameterError("overlap must be non-negative");
  if (!(opts.tol > 0.0)) throw ParameterError("tolerance must be positive");
  if (opts.max_iter < 1) throw ParameterError("max_iter must be positive");
  if (original.empty() || original.size() != expanded.size()) {
    throw StructureError("need one expanded subgraph per original subgraph");
  }
  std::unordered_set<const OptiNode*> seen;
  for (const auto& view : original) {
    for (const OptiNode* n : view.nodes) {
      if (!graph.contains(n)) throw StructureError("subgraph node '" + n->name() + "' is not in the graph");
      if (!seen.insert(n).second) throw StructureError("node '" + n->name() + "' belongs to two subgraphs");
    }
  }
  const auto all = graph.all_nodes();
  if (seen.size() != all.size()) throw StructureError("subgraphs do not cover every node");
  for (std::size_t i = 0; i < original.size(); ++i) {
    for (const OptiNode* n : expanded[i].nodes) {
      if (!graph.contains(n)) throw StructureError("expanded node '" + n->name() + "' is not in the graph");
    }
    const std::unordered_set<const OptiNode*> ex(expanded[i].nodes.begin(), expanded[i].nodes.end());
    for (const OptiNode* n : original[i].nodes) {
      if (!ex.count(n)) throw StructureError("expanded subgraph " + std::to_string(i) + " misses node '" + n->name() + "'");
    }
  }

  SchwarzState s;
  s.incident = classify_links(graph, expanded, opts);
  s.original = std::move(original);
  s.expanded = std::move(expanded);
  for (const OptiNode* n : all) {
    for (std::size_t j = 0; j < n->num_variables(); ++j) {
      const VarRef v = n->variable(j);
      s.primal[v] = opts.warm_start ? opts.warm_start->value(v) : n->variables()[j].start;
    }
  }
  for (const LinkRef& l : graph.all_link_constraints()) {
    s.duals[key_of(l)] = opts.warm_start ? opts.warm_start->link_dual(l) : 0.0;
  }
  return s;
}

FlatQP build_subproblem(const SchwarzState& state, int i) {
  const SubgraphView& view = state.expanded.at(i);
  QPAssembler a;
  for (const OptiNode* n : view.nodes) a.add_node(*n);
  for (const OptiEdge* e : links_in(view)) {
    for (std::size_t l = 0; l < e->link_constraints().size(); ++l) a.add_link(*e, l);
  }
  auto external = [&](VarRef v) { return cached(state.primal, v); };
  for (const LinkRef& l : state.incident[i].primal) a.add_link_with_fixed(*l.edge, l.index, external);
  // lambda * (a'x - rhs) with external terms folded into the constant.
  for (const LinkRef& l : state.incident[i].dual) {
    auto it = state.duals.find(key_of(l));
    if (it == state.duals.end()) throw StateError("no cached multiplier for an incident link");
    const double lambda = it->second;
    const LinkConstraint& link = l.get();
    double constant = -link.rhs;
    for (const auto& [v, coef] : link.terms) {
      if (a.has_variable(v)) {
        a.add_linear_cost(v, lambda * coef);
      } else {
        constant += coef * external(v);
      }
    }
    a.add_constant(lambda * constant);
  }
  return a.finish();
}

SchwarzResiduals residuals(const OptiGraph& graph, const SchwarzState& state) {
  SchwarzResiduals r;
  for (const LinkRef& l : graph.all_link_constraints()) r.primal = std::max(r.primal, link_violation(l.get(), state.primal));
  for (const auto& [key, est] : state.cut_estimates) {
    if (est.size() < 2) continue;
    const auto [lo, hi] = std::minmax_element(est.begin(), est.end());
    r.dual = std::max(r.dual, *hi - *lo);
  }
  return r;
}

SchwarzResult schwarz_solve(const OptiGraph& graph, const SchwarzOptions& opts) {
  if (opts.overlap < 0) throw ParameterError("overlap must be non-negative");
  std::vector<SubgraphView> original = original_subgraphs(graph);
  std::vector<SubgraphView> expanded;
  for (const auto& view : original) expanded.push_back(expand(graph, view, opts.overlap));
  return schwarz_solve(graph, std::move(original), std::move(expanded), opts);
}

SchwarzResult schwarz_solve(const OptiGraph& graph, std::vector<SubgraphView> original,
                            std::vector<SubgraphView> expanded, const SchwarzOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  SchwarzState state = init_state(graph, std::move(original), std::move(expanded), opts);
  const int parts = static_cast<int>(state.original.size());
  const auto owner = owners(state.original);
  const auto links = graph.all_link_constraints();

  auto full = std::make_shared<const FlatQP>(flatten(graph));
  SchwarzResult result;
  result.solution.qp = full;
  result.solution.index_rows();
  if (opts.trace) *opts.trace << "iter,r_pr,r_du,seconds\n";

  const double start_residual = residuals(graph, state).primal;
  std::vector<Solution> sols(parts);
  std::vector<std::exception_ptr> errors(parts);
  SolveStatus status = SolveStatus::kIterationLimit;

  for (int k = 1; k <= opts.max_iter; ++k) {
    detail::parallel_for(parts, opts.threads, [&](int i) {
      try {
        sols[i] = solve_monolithic(build_subproblem(state, i), opts.subproblem);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    // Barrier: everything below reads this iteration's solutions in part order.
    for (int i = 0; i < parts; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      if (!sols[i].optimal()) {
        result.failed_subgraph = i;
        result.solution.status = sols[i].status;
        result.solution.iterations = k;
        return result;
      }
    }

    for (int i = 0; i < parts; ++i) {
      for (const OptiNode* n : state.original[i].nodes) {
        for (std::size_t j = 0; j < n->num_variables(); ++j) {
          const VarRef v = n->variable(j);
          state.primal[v] = sols[i].value(v);
        }
      }
    }
    std::map<LinkKey, std::vector<double>> estimates;
    for (int i = 0; i < parts; ++i) {
      for (const LinkRef& l : subproblem_links(state, i)) estimates[key_of(l)].push_back(sols[i].link_dual(l));
    }
    state.cut_estimates.clear();
    for (const LinkRef& l : links) {
      const int p = edge_owner(*l.edge, owner);
      auto it = estimates.find(key_of(l));
      if (p >= 0) {
        state.duals[key_of(l)] = sols[p].link_dual(l);
      } else if (it != estimates.end()) {
        double sum = 0.0;
        for (double d : it->second) sum += d;
        state.duals[key_of(l)] = sum / static_cast<double>(it->second.size());
        state.cut_estimates[key_of(l)] = it->second;
      }
    }

    const SchwarzResiduals r = residuals(graph, state);
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    result.history.push_back({k, r.primal, r.dual, seconds});
    if (opts.trace) *opts.trace << k << ',' << r.primal << ',' << r.dual << ',' << seconds << '\n';
    result.solution.iterations = k;
    if (r.max() <= opts.tol) {
      status = SolveStatus::kOptimal;
      break;
    }
    if (!std::isfinite(r.primal) || r.primal > opts.divergence_factor * std::max(start_residual, 1.0)) {
      result.diverged = true;
      status = SolveStatus::kNumericalError;
      break;
    }
  }

  // Assemble the global point: owner values and bound multipliers, node row
  // multipliers from the owner and link multipliers from the cache.
  Solution& out = result.solution;
  out.status = status;
  const int nv = full->num_variables();
  out.x.resize(nv);
  out.z_lower.resize(nv);
  out.z_upper.resize(nv);
  for (int c = 0; c < nv; ++c) {
    const VarRef& v = full->var_map[c];
    const Solution& s = sols[owner.at(v.node)];
    const int sc = s.qp->index_of(v);
    out.x[c] = s.x[sc];
    out.z_lower[c] = s.z_lower[sc];
    out.z_upper[c] = s.z_upper[sc];
  }
  auto row_dual = [&](const RowSource& src) {
    if (src.kind == RowSource::Kind::kLink) return state.duals.at({src.edge, src.index});
    return sols[owner.at(src.node)].node_dual(src.node, src.index);
  };
  out.y_eq.resize(full->num_eq());
  out.y_in.resize(full->num_in());
  for (int r = 0; r < full->num_eq(); ++r) out.y_eq[r] = row_dual(full->eq_rows[r]);
  for (int r = 0; r < full->num_in(); ++r) out.y_in[r] = row_dual(full->in_rows[r]);
  out.objective = full->objective(out.x);
  return result;
}

}  // namespace optigraph
