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


#include "optigraph/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <unordered_map>

#include "optigraph/error.hpp"

namespace optigraph {

namespace {

constexpr double kGainEps = 1e-12;

// Assignment state with per-edge pin counts per part.
class PartState {
 public:
  PartState(const Hypergraph& h, int k)
      : h_(h), k_(k), label_(h.vertex_count, -1), load_(k, 0.0), count_(k, 0),
        pins_(h.hyperedges.size() * k, 0), vertex_edges_(h.vertex_edges()) {}

  int label(int v) const { return label_[v]; }
  double load(int p) const { return load_[p]; }
  int count(int p) const { return count_[p]; }
  int pins(int e, int p) const { return pins_[static_cast<std::size_t>(e) * k_ + p]; }
  const std::vector<int>& edges_of(int v) const { return vertex_edges_[v]; }
  const std::vector<int>& labels() const { return label_; }

  void assign(int v, int p) {
    const int old = label_[v];
    if (old >= 0) {
      load_[old] -= h_.vertex_weights[v];
      --count_[old];
      for (int e : vertex_edges_[v]) --pins_[static_cast<std::size_t>(e) * k_ + old];
    }
    label_[v] = p;
    load_[p] += h_.vertex_weights[v];
    ++count_[p];
    for (int e : vertex_edges_[v]) ++pins_[static_cast<std::size_t>(e) * k_ + p];
  }

  bool is_cut(int e) const {
    const int size = static_cast<int>(h_.hyperedges[e].size());
    for (int p = 0; p < k_; ++p) {
      const int c = pins(e, p);
      if (c > 0) return c != size;
    }
    return false;
  }

  bool on_boundary(int v) const {
    for (int e : vertex_edges_[v]) {
      if (is_cut(e)) return true;
    }
    return false;
  }

  // Change in cut weight saved by moving v to part `to`.
  double gain(int v, int to) const {
    const int from = label_[v];
    double g = 0.0;
    for (int e : vertex_edges_[v]) {
      const int size = static_cast<int>(h_.hyperedges[e].size());
      if (size < 2) continue;
      const bool before = pins(e, from) != size;
      const bool after = pins(e, to) + 1 != size;
      g += h_.edge_weights[e] * (static_cast<int>(before) - static_cast<int>(after));
    }
    return g;
  }

  // Weight of edges of v that already have a pin in part p.
  double connection(int v, int p) const {
    double c = 0.0;
    for (int e : vertex_edges_[v]) {
      if (pins(e, p) > 0) c += h_.edge_weights[e];
    }
    return c;
  }

  double cut() const {
    double c = 0.0;
    for (std::size_t e = 0; e < h_.hyperedges.size(); ++e) {
      if (is_cut(static_cast<int>(e))) c += h_.edge_weights[e];
    }
    return c;
  }

 private:
  const Hypergraph& h_;
  int k_;
  std::vector<int> label_;
  std::vector<double> load_;
  std::vector<int> count_;
  std::vector<int> pins_;
  std::vector<std::vector<int>> vertex_edges_;
};

std::vector<std::vector<int>> neighbors(const Hypergraph& h) {
  std::vector<std::vector<int>> adj(h.vertex_count);
  for (const auto& e : h.hyperedges) {
    for (int u : e) {
      for (int v : e) {
        if (u != v) adj[u].push_back(v);
      }
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int source) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int u : adj[v]) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
    }
  }
  return dist;
}

// Farthest vertex from `start` within its component, lowest index on ties.
int farthest(const std::vector<std::vector<int>>& adj, int start) {
  const std::vector<int> dist = bfs_distances(adj, start);
  int best = start;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] > dist[best]) best = static_cast<int>(v);
  }
  return best;
}

// Pin-weighted attachment of v to part p.
double attachment(const Hypergraph& h, const PartState& st, int v, int p) {
  double a = 0.0;
  for (int e : st.edges_of(v)) a += h.edge_weights[e] * st.pins(e, p);
  return a;
}

// Start of the next part: the unassigned vertex most attached to assigned
// ones, or a peripheral vertex of an untouched component.
int next_start(const Hypergraph& h, const PartState& st, int k, const std::vector<std::vector<int>>& adj) {
  int best = -1;
  double best_a = 0.0;
  for (int v = 0; v < h.vertex_count; ++v) {
    if (st.label(v) >= 0) continue;
    double a = 0.0;
    for (int p = 0; p < k; ++p) a += attachment(h, st, v, p);
    if (a > best_a) {
      best = v;
      best_a = a;
    }
  }
  if (best >= 0) return best;
  for (int v = 0; v < h.vertex_count; ++v) {
    if (st.label(v) < 0) return farthest(adj, v);
  }
  return -1;
}

// Greedy graph growing: parts are filled one after another up to an equal
// share of the remaining size, always taking the frontier vertex most
// attached to the growing part. The last part takes what is left.
void grow(const Hypergraph& h, int k, double bound, const std::vector<std::vector<int>>& adj, std::uint64_t seed,
          PartState& st) {
  std::mt19937_64 rng(seed);
  const int first = static_cast<int>(std::uniform_int_distribution<int>(0, h.vertex_count - 1)(rng));
  double remaining = std::accumulate(h.vertex_weights.begin(), h.vertex_weights.end(), 0.0);
  int start = farthest(adj, farthest(adj, first));
  for (int p = 0; p < k - 1 && start >= 0; ++p) {
    const double target = remaining / (k - p);
    std::set<int> frontier{start};
    while (!frontier.empty()) {
      int pick = -1;
      double pick_a = -1.0;
      for (int v : frontier) {
        const double w = h.vertex_weights[v];
        const bool fits = st.load(p) + w <= target || (st.load(p) + 0.5 * w <= target && st.load(p) + w <= bound);
        if (!fits) continue;
        const double a = attachment(h, st, v, p);
        if (a > pick_a) {
          pick = v;
          pick_a = a;
        }
      }
      if (pick < 0) break;
      st.assign(pick, p);
      remaining -= h.vertex_weights[pick];
      frontier.erase(pick);
      for (int u : adj[pick]) {
        if (st.label(u) < 0) frontier.insert(u);
      }
      if (frontier.empty() && st.load(p) < target) {
        const int jump = next_start(h, st, k, adj);
        if (jump >= 0) frontier.insert(jump);
      }
    }
    start = next_start(h, st, k, adj);
  }
  for (int v = 0; v < h.vertex_count; ++v) {
    if (st.label(v) < 0) st.assign(v, k - 1);
  }
}

struct Move {
  int v = -1;
  int to = -1;
  double gain = 0.0;
};

// Best single move among vertices of `from_part` (all parts when -1) that
// keeps the target under the bound.
Move best_move(const Hypergraph& h, int k, double bound, const PartState& st, const std::vector<char>& locked,
               int from_part, bool boundary_only) {
  Move best;
  for (int v = 0; v < h.vertex_count; ++v) {
    const int a = st.label(v);
    if (locked[v] || (from_part >= 0 && a != from_part)) continue;
    if (st.count(a) <= 1) continue;
    if (boundary_only && !st.on_boundary(v)) continue;
    for (int b = 0; b < k; ++b) {
      if (b == a || st.load(b) + h.vertex_weights[v] > bound) continue;
      const double g = st.gain(v, b);
      if (best.v < 0 || g > best.gain + kGainEps) best = {v, b, g};
    }
  }
  return best;
}

// Places vertices the growth phase could not fit and moves or swaps vertices
// out of overloaded parts.
void repair(const Hypergraph& h, int k, double bound, PartState& st) {
  std::vector<int> left;
  for (int v = 0; v < h.vertex_count; ++v) {
    if (st.label(v) < 0) left.push_back(v);
  }
  std::stable_sort(left.begin(), left.end(),
                   [&](int a, int b) { return h.vertex_weights[a] > h.vertex_weights[b]; });
  for (int v : left) {
    int p = 0;
    for (int q = 1; q < k; ++q) {
      if (st.load(q) < st.load(p)) p = q;
    }
    st.assign(v, p);
  }
  const std::vector<char> unlocked(h.vertex_count, 0);
  const int max_steps = 10 * h.vertex_count * k + 10;
  for (int step = 0; step < max_steps; ++step) {
    int over = -1;
    for (int p = 0; p < k; ++p) {
      if (st.load(p) > bound && (over < 0 || st.load(p) > st.load(over))) over = p;
    }
    if (over < 0) return;
    Move m = best_move(h, k, bound, st, unlocked, over, false);
    if (m.v >= 0) {
      st.assign(m.v, m.to);
      continue;
    }
    // Swap a vertex of the overloaded part with a lighter one elsewhere.
    int su = -1, sw = -1;
    double best_drop = 0.0;
    for (int u = 0; u < h.vertex_count; ++u) {
      if (st.label(u) != over) continue;
      for (int w = 0; w < h.vertex_count; ++w) {
        const int b = st.label(w);
        if (b == over) continue;
        const double drop = h.vertex_weights[u] - h.vertex_weights[w];
        if (drop <= 0.0 || st.load(b) + drop > bound) continue;
        if (drop > best_drop) {
          best_drop = drop;
          su = u;
          sw = w;
        }
      }
    }
    if (su < 0) break;
    const int b = st.label(sw);
    st.assign(su, b);
    st.assign(sw, over);
  }
  throw BalanceError("could not meet the part size bound " + std::to_string(bound));
}

void refine(const Hypergraph& h, int k, double bound, PartState& st) {
  constexpr int kMaxFruitless = 100;
  for (;;) {
    std::vector<char> locked(h.vertex_count, 0);
    std::vector<std::pair<int, int>> moves;  // (vertex, previous part)
    double cur = 0.0, best = 0.0;
    std::size_t best_len = 0;
    for (;;) {
      const Move m = best_move(h, k, bound, st, locked, -1, true);
      if (m.v < 0) break;
      moves.emplace_back(m.v, st.label(m.v));
      st.assign(m.v, m.to);
      locked[m.v] = 1;
      cur -= m.gain;
      if (cur < best - kGainEps) {
        best = cur;
        best_len = moves.size();
      }
      if (moves.size() - best_len > kMaxFruitless) break;
    }
    while (moves.size() > best_len) {
      st.assign(moves.back().first, moves.back().second);
      moves.pop_back();
    }
    if (best_len == 0) return;
  }
}

}  // namespace

double balance_bound(const Hypergraph& h, int k, double eps_max) {
  const double total = std::accumulate(h.vertex_weights.begin(), h.vertex_weights.end(), 0.0);
  return (1.0 + eps_max) * total / k;
}

std::vector<int> partition_heuristic(const Hypergraph& h, int k, double eps_max, std::uint64_t seed) {
  if (k < 1) throw ParameterError("part count must be >= 1, got " + std::to_string(k));
  if (!(eps_max >= 0.0)) throw ParameterError("imbalance must be >= 0");
  const double total = std::accumulate(h.vertex_weights.begin(), h.vertex_weights.end(), 0.0);
  if (total < k) throw ParameterError("total node size is smaller than the part count");
  const double bound = balance_bound(h, k, eps_max);
  for (int v = 0; v < h.vertex_count; ++v) {
    if (h.vertex_weights[v] > bound) {
      throw BalanceError("vertex " + std::to_string(v) + " of size " + std::to_string(h.vertex_weights[v]) +
                         " exceeds the part bound " + std::to_string(bound));
    }
  }
  // Part sizes are integers, so no part can exceed floor(bound).
  if (std::floor(bound) * k < total) {
    throw BalanceError("total size " + std::to_string(total) + " does not fit in " + std::to_string(k) +
                       " parts of at most " + std::to_string(bound));
  }
  if (k == 1) return std::vector<int>(h.vertex_count, 0);
  const auto adj = neighbors(h);
  PartState st(h, k);
  grow(h, k, bound, adj, seed, st);
  repair(h, k, bound, st);
  refine(h, k, bound, st);
  return st.labels();
}

PartitionMetrics metrics(const std::vector<int>& labels, int k, const Hypergraph& h) {
  if (static_cast<int>(labels.size()) != h.vertex_count) throw PartitionError("label count does not match vertices");
  PartitionMetrics m;
  m.part_sizes.assign(k, 0.0);
  for (int v = 0; v < h.vertex_count; ++v) {
    if (labels[v] < 0 || labels[v] >= k) throw PartitionError("label out of range");
    m.part_sizes[labels[v]] += h.vertex_weights[v];
  }
  for (std::size_t e = 0; e < h.hyperedges.size(); ++e) {
    std::set<int> parts;
    for (int v : h.hyperedges[e]) parts.insert(labels[v]);
    if (parts.size() > 1) {
      m.edge_cut += h.edge_weights[e];
      m.connectivity += h.edge_weights[e] * (static_cast<double>(parts.size()) - 1.0);
    }
  }
  const double total = std::accumulate(m.part_sizes.begin(), m.part_sizes.end(), 0.0);
  if (total > 0.0) m.imbalance = *std::max_element(m.part_sizes.begin(), m.part_sizes.end()) / (total / k) - 1.0;
  return m;
}

Partition make_partition(const OptiGraph& graph, const std::vector<int>& labels, const RefMap& ref, int k) {
  if (labels.size() != ref.vertex_node.size()) {
    throw PartitionError("got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(ref.vertex_node.size()) + " vertices");
  }
  const auto pos = node_positions(graph);
  Partition part;
  part.labels.assign(pos.size(), -1);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const OptiNode* n = ref.vertex_node[v];
    if (n == nullptr) continue;
    auto it = pos.find(n);
    if (it == pos.end()) throw PartitionError("projection node '" + n->name() + "' is not in the graph");
    if (labels[v] < 0) throw PartitionError("negative label for node '" + n->name() + "'");
    part.labels[it->second] = labels[v];
  }
  int max_label = -1;
  for (std::size_t i = 0; i < part.labels.size(); ++i) {
    if (part.labels[i] < 0) throw PartitionError("node " + std::to_string(i) + " has no label");
    max_label = std::max(max_label, part.labels[i]);
  }
  part.k = k < 0 ? max_label + 1 : k;
  if (max_label >= part.k) throw PartitionError("label " + std::to_string(max_label) + " >= part count");
  part.graph = &graph;
  part.revision = graph.revision();
  return part;
}

Partition partition_graph(const OptiGraph& graph, int k, double eps_max, std::uint64_t seed) {
  auto [h, ref] = to_hypergraph(graph);
  return make_partition(graph, partition_heuristic(h, k, eps_max, seed), ref, k);
}

void apply_partition(OptiGraph& graph, const Partition& partition) {
  if (partition.graph != &graph) throw PartitionError("partition was made for a different graph");
  if (partition.revision != graph.revision()) {
    throw StalenessError("graph '" + graph.name() + "' changed after the partition was made");
  }
  graph.reform_subgraphs(partition.labels, partition.k);
}

void write_partition_file(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  for (int l : labels) out << l << '\n';
}

std::vector<int> read_partition_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int value = 0;
    const char* end = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(line.data(), end, value);
    if (ec != std::errc() || ptr != end) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad label '" + line + "'");
    }
    labels.push_back(value);
  }
  return labels;
}

VarRef AggregationMap::operator[](VarRef original) const {
  auto it = variables.find(original);
  if (it == variables.end()) throw ReferenceError("variable is not part of the aggregated graph");
  return it->second;
}

VarMap<double> AggregationMap::transport(const std::function<double(VarRef)>& aggregate_value) const {
  VarMap<double> out;
  for (const auto& [orig, agg] : variables) out[orig] = aggregate_value(agg);
  return out;
}

namespace {

class Aggregator {
 public:
  explicit Aggregator(int levels) : levels_(levels) {}

  void copy(const OptiGraph& src, OptiGraph& dst, int depth) {
    kept_.emplace_back(&src, &dst);
    for (std::size_t i = 0; i < src.num_local_nodes(); ++i) {
      const OptiNode& n = src.local_node(i);
      OptiNode& out = dst.add_node(n.name());
      add_node_content(n, out, false);
      out.set_objective(remap(n.objective()));
    }
    for (const GraphPtr& sub : src.subgraphs()) {
      if (depth < levels_) {
        GraphPtr child = new_graph(sub->name());
        dst.add_subgraph(child);
        copy(*sub, *child, depth + 1);
      } else {
        collapse(*sub, dst.add_node(sub->name()));
      }
    }
  }

  void add_links() {
    for (const auto& [src, dst] : kept_) {
      for (std::size_t e = 0; e < src->num_local_edges(); ++e) {
        const OptiEdge& edge = src->local_edge(e);
        for (std::size_t i = 0; i < edge.link_constraints().size(); ++i) {
          const LinkConstraint& lc = edge.link_constraints()[i];
          LinExpr expr;
          for (const auto& [v, c] : lc.terms) expr.add_term(map_.variables.at(v), c);
          AggregationMap::LinkTarget target;
          target.link = dst->add_link_constraint(LinearConstraint{expr, lc.sense, lc.rhs}, lc.name);
          map_.link_constraints[{&edge, i}] = target;
        }
      }
    }
  }

  AggregationMap take_map() { return std::move(map_); }

 private:
  void add_node_content(const OptiNode& n, OptiNode& out, bool prefix) {
    const std::string pre = prefix ? n.name() + "." : std::string();
    for (std::size_t i = 0; i < n.num_variables(); ++i) {
      const Variable& v = n.variables()[i];
      map_.variables[n.variable(i)] = out.add_variable(pre + v.name, v.lower, v.upper, v.start);
    }
    for (std::size_t c = 0; c < n.constraints().size(); ++c) {
      const NodeConstraint& nc = n.constraints()[c];
      LinExpr expr;
      for (const auto& [idx, coef] : nc.terms) expr.add_term(map_.variables.at(n.variable(idx)), coef);
      const std::string name = nc.name.empty() ? std::string() : pre + nc.name;
      map_.node_constraints[{&n, c}] = {&out, out.add_constraint(LinearConstraint{expr, nc.sense, nc.rhs}, name)};
    }
  }

  QuadExpr remap(const QuadExpr& q) const {
    QuadExpr out(q.constant());
    for (const auto& [v, c] : q.linear().terms()) out.linear().add_term(map_.variables.at(v), c);
    for (const QuadTerm& t : q.quadratic_terms()) {
      out.add_quadratic_term(map_.variables.at(t.first), map_.variables.at(t.second), t.coef);
    }
    return out;
  }

  void collapse(const OptiGraph& sub, OptiNode& out) {
    QuadExpr objective;
    for (const OptiNode* n : sub.all_nodes()) {
      add_node_content(*n, out, true);
      objective += remap(n->objective());
    }
    out.set_objective(std::move(objective));
    for (const OptiEdge* edge : sub.all_edges()) {
      for (std::size_t i = 0; i < edge->link_constraints().size(); ++i) {
        const LinkConstraint& lc = edge->link_constraints()[i];
        LinExpr expr;
        for (const auto& [v, c] : lc.terms) expr.add_term(map_.variables.at(v), c);
        AggregationMap::LinkTarget target;
        target.node = &out;
        target.index = out.add_constraint(LinearConstraint{expr, lc.sense, lc.rhs}, lc.name);
        map_.link_constraints[{edge, i}] = target;
      }
    }
  }

  int levels_;
  AggregationMap map_;
  std::vector<std::pair<const OptiGraph*, OptiGraph*>> kept_;
};

}  // namespace

std::pair<GraphPtr, AggregationMap> aggregate(const OptiGraph& graph, int levels) {
  if (levels < 0) throw ParameterError("aggregation levels must be >= 0, got " + std::to_string(levels));
  GraphPtr out = new_graph(graph.name());
  Aggregator agg(levels);
  agg.copy(graph, *out, 0);
  agg.add_links();
  return {out, agg.take_map()};
}

}  // namespace optigraph
