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

#include "optigraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "optigraph/error.hpp"

namespace optigraph {

std::string_view to_string(Sense sense) {
  switch (sense) {
    case Sense::kLessEqual:
      return "<=";
    case Sense::kEqual:
      return "==";
    case Sense::kGreaterEqual:
      return ">=";
  }
  return "?";
}

double constraint_violation(double lhs, Sense sense, double rhs) {
  switch (sense) {
    case Sense::kLessEqual:
      return std::max(0.0, lhs - rhs);
    case Sense::kGreaterEqual:
      return std::max(0.0, rhs - lhs);
    case Sense::kEqual:
      return std::abs(lhs - rhs);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Expressions

LinExpr& LinExpr::add_term(VarRef var, double coef) {
  for (auto& [v, c] : terms_) {
    if (same_variable(v, var)) {
      c += coef;
      return *this;
    }
  }
  terms_.emplace_back(var, coef);
  return *this;
}

double LinExpr::evaluate(const std::function<double(VarRef)>& value_of) const {
  double value = constant_;
  for (const auto& [v, c] : terms_) value += c * value_of(v);
  return value;
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  for (const auto& [v, c] : other.terms_) add_term(v, c);
  constant_ += other.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
  for (const auto& [v, c] : other.terms_) add_term(v, -c);
  constant_ -= other.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double scale) {
  for (auto& term : terms_) term.second *= scale;
  constant_ *= scale;
  return *this;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator-(LinExpr a) { return a *= -1.0; }
LinExpr operator*(LinExpr a, double s) { return a *= s; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

QuadExpr& QuadExpr::add_quadratic_term(VarRef a, VarRef b, double coef) {
  const bool swap = (a.node == b.node) ? a.index > b.index : std::less<const OptiNode*>()(b.node, a.node);
  if (swap) std::swap(a, b);
  for (auto& term : quad_) {
    if (same_variable(term.first, a) && same_variable(term.second, b)) {
      term.coef += coef;
      return *this;
    }
  }
  quad_.push_back({a, b, coef});
  return *this;
}

double QuadExpr::evaluate(const std::function<double(VarRef)>& value_of) const {
  double value = linear_.evaluate(value_of);
  for (const auto& t : quad_) value += t.coef * value_of(t.first) * value_of(t.second);
  return value;
}

QuadExpr& QuadExpr::operator+=(const QuadExpr& other) {
  linear_ += other.linear_;
  for (const auto& t : other.quad_) add_quadratic_term(t.first, t.second, t.coef);
  return *this;
}

QuadExpr& QuadExpr::operator*=(double scale) {
  linear_ *= scale;
  for (auto& t : quad_) t.coef *= scale;
  return *this;
}

QuadExpr operator+(QuadExpr a, const QuadExpr& b) { return a += b; }
QuadExpr operator-(QuadExpr a, const QuadExpr& b) {
  QuadExpr negated = b;
  negated *= -1.0;
  return a += negated;
}
QuadExpr operator*(QuadExpr a, double s) { return a *= s; }
QuadExpr operator*(double s, QuadExpr a) { return a *= s; }

QuadExpr operator*(const LinExpr& a, const LinExpr& b) {
  QuadExpr out;
  for (const auto& [va, ca] : a.terms()) {
    for (const auto& [vb, cb] : b.terms()) out.add_quadratic_term(va, vb, ca * cb);
  }
  LinExpr linear = a * b.constant();
  for (const auto& [vb, cb] : b.terms()) linear.add_term(vb, cb * a.constant());
  linear.add_constant(a.constant() * b.constant() - linear.constant());
  out.linear() = linear;
  return out;
}

QuadExpr square(const LinExpr& e) { return e * e; }

namespace {

LinearConstraint make_constraint(const LinExpr& lhs, const LinExpr& rhs, Sense sense) {
  LinearConstraint c;
  c.expr = lhs - rhs;
  c.rhs = -c.expr.constant();
  c.expr.add_constant(-c.expr.constant());
  c.sense = sense;
  return c;
}

}  // namespace

LinearConstraint operator<=(const LinExpr& lhs, const LinExpr& rhs) {
  return make_constraint(lhs, rhs, Sense::kLessEqual);
}
LinearConstraint operator>=(const LinExpr& lhs, const LinExpr& rhs) {
  return make_constraint(lhs, rhs, Sense::kGreaterEqual);
}
LinearConstraint operator==(const LinExpr& lhs, const LinExpr& rhs) {
  return make_constraint(lhs, rhs, Sense::kEqual);
}

// ---------------------------------------------------------------------------
// OptiNode

VarRef OptiNode::add_variable(std::string name, double lower, double upper, std::optional<double> start) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw BoundError("variable '" + name + "' on node '" + name_ + "' has lower bound " + std::to_string(lower) +
                     " above upper bound " + std::to_string(upper));
  }
  if (lower == kInfinity || upper == -kInfinity) {
    throw BoundError("variable '" + name + "' on node '" + name_ + "' has an empty domain");
  }
  if (start && !std::isfinite(*start)) {
    throw BoundError("variable '" + name + "' on node '" + name_ + "' has a non-finite start value");
  }
  if (name.empty()) name = "v" + std::to_string(variables_.size());
  if (variable_index_.count(name) != 0) {
    throw ModelError("duplicate variable name '" + name + "' on node '" + name_ + "'");
  }
  const double x0 = std::clamp(start.value_or(0.0), lower, upper);
  variable_index_.emplace(name, variables_.size());
  variables_.push_back({std::move(name), lower, upper, x0});
  touch();
  return {this, variables_.size() - 1};
}

VarRef OptiNode::variable(std::size_t index) const {
  if (index >= variables_.size()) {
    throw ReferenceError("node '" + name_ + "' has no variable #" + std::to_string(index));
  }
  return {this, index};
}

VarRef OptiNode::variable(std::string_view name) const {
  if (auto v = find_variable(name)) return *v;
  throw ReferenceError("node '" + name_ + "' has no variable '" + std::string(name) + "'");
}

std::optional<VarRef> OptiNode::find_variable(std::string_view name) const {
  auto it = variable_index_.find(std::string(name));
  if (it == variable_index_.end()) return std::nullopt;
  return VarRef{this, it->second};
}

void OptiNode::check_local(const VarRef& v, std::string_view what) const {
  if (v.node != this) {
    throw ScopeError(std::string(what) + " on node '" + name_ + "' references variable of node '" +
                     (v.node ? v.node->name() : std::string("<null>")) + "'");
  }
  if (v.index >= variables_.size()) {
    throw IntegrityError(std::string(what) + " on node '" + name_ + "' references a missing variable");
  }
}

std::size_t OptiNode::add_constraint(const LinearConstraint& constraint, std::string name) {
  NodeConstraint c;
  c.name = std::move(name);
  c.sense = constraint.sense;
  c.rhs = constraint.rhs - constraint.expr.constant();
  for (const auto& [v, coef] : constraint.expr.terms()) {
    check_local(v, "constraint");
    if (coef != 0.0) c.terms.emplace_back(v.index, coef);
  }
  if (c.terms.empty()) {
    throw ModelError("constraint on node '" + name_ + "' has no nonzero coefficient");
  }
  constraints_.push_back(std::move(c));
  touch();
  return constraints_.size() - 1;
}

void OptiNode::set_objective(QuadExpr objective) {
  for (const auto& [v, coef] : objective.linear().terms()) check_local(v, "objective");
  for (const auto& t : objective.quadratic_terms()) {
    check_local(t.first, "objective");
    check_local(t.second, "objective");
  }
  objective_ = std::move(objective);
  touch();
}

void OptiNode::touch() {
  if (graph_) graph_->touch();
}

// ---------------------------------------------------------------------------
// OptiEdge

bool OptiEdge::contains(const OptiNode* node) const {
  return std::find(nodes_.begin(), nodes_.end(), node) != nodes_.end();
}

// ---------------------------------------------------------------------------
// OptiGraph

GraphPtr OptiGraph::create(std::string name) { return GraphPtr(new OptiGraph(std::move(name))); }

OptiGraph::~OptiGraph() {
  for (auto& sub : subgraphs_) sub->parent_ = nullptr;
}

void OptiGraph::touch() {
  for (OptiGraph* g = this; g != nullptr; g = g->parent_) ++g->revision_;
}

OptiNode& OptiGraph::add_node(std::string name) {
  if (name.empty()) name = (name_.empty() ? std::string("n") : name_ + "_n") + std::to_string(nodes_.size());
  nodes_.push_back(std::unique_ptr<OptiNode>(new OptiNode(this, std::move(name))));
  touch();
  return *nodes_.back();
}

bool OptiGraph::contains(const OptiNode* node) const {
  if (node == nullptr) return false;
  for (const OptiGraph* g = node->graph_; g != nullptr; g = g->parent_) {
    if (g == this) return true;
  }
  return false;
}

bool OptiGraph::contains(const OptiEdge* edge) const {
  if (edge == nullptr) return false;
  for (const OptiGraph* g = edge->graph_; g != nullptr; g = g->parent_) {
    if (g == this) return true;
  }
  return false;
}

const OptiGraph& OptiGraph::root() const {
  const OptiGraph* g = this;
  while (g->parent_ != nullptr) g = g->parent_;
  return *g;
}

bool OptiGraph::is_ancestor_of(const OptiGraph* g) const {
  for (; g != nullptr; g = g->parent_) {
    if (g == this) return true;
  }
  return false;
}

OptiEdge& OptiGraph::edge_for(const std::vector<const OptiNode*>& nodes) {
  std::vector<const OptiNode*> key = nodes;
  std::sort(key.begin(), key.end());
  auto it = edge_index_.find(key);
  if (it != edge_index_.end()) return *it->second;
  edges_.push_back(std::unique_ptr<OptiEdge>(new OptiEdge(this)));
  OptiEdge& edge = *edges_.back();
  edge.nodes_ = nodes;
  edge_index_.emplace(std::move(key), &edge);
  return edge;
}

void OptiGraph::rebuild_edge_index() {
  edge_index_.clear();
  for (auto& edge : edges_) {
    std::vector<const OptiNode*> key = edge->nodes_;
    std::sort(key.begin(), key.end());
    edge_index_.emplace(std::move(key), edge.get());
  }
}

LinkRef OptiGraph::add_link_constraint(const LinearConstraint& constraint, std::string name) {
  LinkConstraint link;
  link.name = std::move(name);
  link.sense = constraint.sense;
  link.rhs = constraint.rhs - constraint.expr.constant();
  std::vector<const OptiNode*> span;
  for (const auto& [v, coef] : constraint.expr.terms()) {
    if (coef == 0.0) continue;
    if (!contains(v.node)) {
      throw ScopeError("link constraint references node '" + (v.node ? v.node->name() : std::string("<null>")) +
                       "' which is not reachable from graph '" + name_ + "'");
    }
    if (v.index >= v.node->num_variables()) {
      throw IntegrityError("link constraint references a missing variable of node '" + v.node->name() + "'");
    }
    link.terms.emplace_back(v, coef);
    if (std::find(span.begin(), span.end(), v.node) == span.end()) span.push_back(v.node);
  }
  if (span.size() < 2) {
    throw EdgeArityError("link constraint must span at least two nodes (spans " + std::to_string(span.size()) +
                         "); use a node constraint instead");
  }
  // The constraint must live in the lowest common ancestor graph of its nodes.
  auto child_of_this = [this](const OptiNode* node) -> const OptiGraph* {
    const OptiGraph* g = node->graph_;
    if (g == this) return this;
    while (g->parent_ != this) g = g->parent_;
    return g;
  };
  const OptiGraph* first = child_of_this(span.front());
  if (first != this && std::all_of(span.begin(), span.end(),
                                   [&](const OptiNode* n) { return child_of_this(n) == first; })) {
    throw ScopeError("link constraint over nodes of subgraph '" + first->name() +
                     "' must be added to that subgraph, not to '" + name_ + "'");
  }
  OptiEdge& edge = edge_for(span);
  edge.links_.push_back(std::move(link));
  touch();
  return {&edge, edge.links_.size() - 1};
}

void OptiGraph::add_subgraph(const GraphPtr& child) {
  if (!child) throw HierarchyError("cannot attach a null subgraph");
  if (child.get() == this) throw HierarchyError("graph '" + name_ + "' cannot be its own subgraph");
  if (child->is_ancestor_of(this)) {
    throw HierarchyError("attaching '" + child->name() + "' to '" + name_ + "' would create a cycle");
  }
  if (child->parent_ != nullptr) {
    throw HierarchyError("graph '" + child->name() + "' is already a subgraph of '" + child->parent_->name() + "'");
  }
  child->parent_ = this;
  subgraphs_.push_back(child);
  touch();
}

void OptiGraph::collect_nodes(std::vector<const OptiNode*>& out) const {
  for (const auto& n : nodes_) out.push_back(n.get());
  for (const auto& sub : subgraphs_) sub->collect_nodes(out);
}

void OptiGraph::collect_edges(std::vector<const OptiEdge*>& out) const {
  for (const auto& sub : subgraphs_) sub->collect_edges(out);
  for (const auto& e : edges_) out.push_back(e.get());
}

void OptiGraph::collect_subgraphs(std::vector<const OptiGraph*>& out) const {
  for (const auto& sub : subgraphs_) {
    out.push_back(sub.get());
    sub->collect_subgraphs(out);
  }
}

std::vector<const OptiNode*> OptiGraph::all_nodes() const {
  std::vector<const OptiNode*> out;
  collect_nodes(out);
  return out;
}

std::vector<OptiNode*> OptiGraph::all_nodes() {
  std::vector<OptiNode*> out;
  for (const OptiNode* n : std::as_const(*this).all_nodes()) out.push_back(const_cast<OptiNode*>(n));
  return out;
}

std::vector<const OptiEdge*> OptiGraph::all_edges() const {
  std::vector<const OptiEdge*> out;
  collect_edges(out);
  return out;
}

std::vector<LinkRef> OptiGraph::all_link_constraints() const {
  std::vector<LinkRef> out;
  for (const OptiEdge* e : all_edges()) {
    for (std::size_t i = 0; i < e->link_constraints().size(); ++i) out.push_back({e, i});
  }
  return out;
}

std::vector<const OptiGraph*> OptiGraph::all_subgraphs() const {
  std::vector<const OptiGraph*> out;
  collect_subgraphs(out);
  return out;
}

GraphElements OptiGraph::query_elements(Scope scope) const {
  GraphElements out;
  if (scope == Scope::kRecursive) {
    out.nodes = all_nodes();
    out.edges = all_edges();
    out.subgraphs = all_subgraphs();
    return out;
  }
  for (const auto& n : nodes_) out.nodes.push_back(n.get());
  for (const auto& e : edges_) out.edges.push_back(e.get());
  for (const auto& s : subgraphs_) out.subgraphs.push_back(s.get());
  return out;
}

void OptiGraph::reform_subgraphs(const std::vector<int>& part_of, int num_parts) {
  const std::vector<const OptiNode*> order = std::as_const(*this).all_nodes();
  if (part_of.size() != order.size()) {
    throw PartitionError("partition labels " + std::to_string(part_of.size()) + " nodes but graph has " +
                         std::to_string(order.size()));
  }
  for (int p : part_of) {
    if (p < 0 || p >= num_parts) throw PartitionError("partition label " + std::to_string(p) + " out of range");
  }

  // Take ownership of every node and edge in the hierarchy.
  std::unordered_map<const OptiNode*, std::unique_ptr<OptiNode>> owned_nodes;
  std::vector<std::unique_ptr<OptiEdge>> owned_edges;
  std::function<void(OptiGraph&)> harvest = [&](OptiGraph& g) {
    for (auto& sub : g.subgraphs_) harvest(*sub);
    for (auto& n : g.nodes_) {
      const OptiNode* key = n.get();
      owned_nodes.emplace(key, std::move(n));
    }
    for (auto& e : g.edges_) owned_edges.push_back(std::move(e));
    g.nodes_.clear();
    g.edges_.clear();
    g.edge_index_.clear();
  };
  harvest(*this);
  for (auto& sub : subgraphs_) {
    sub->parent_ = nullptr;
    ++sub->revision_;
  }
  subgraphs_.clear();

  std::vector<OptiGraph*> part_graph(static_cast<std::size_t>(num_parts), nullptr);
  std::vector<bool> nonempty(static_cast<std::size_t>(num_parts), false);
  for (int p : part_of) nonempty[p] = true;
  const std::string prefix = name_.empty() ? std::string("part") : name_ + "_part";
  for (int p = 0; p < num_parts; ++p) {
    if (!nonempty[p]) continue;
    GraphPtr sub = create(prefix + std::to_string(p));
    sub->parent_ = this;
    part_graph[p] = sub.get();
    subgraphs_.push_back(std::move(sub));
  }

  std::unordered_map<const OptiNode*, int> part_by_node;
  for (std::size_t i = 0; i < order.size(); ++i) {
    OptiGraph* target = part_graph[part_of[i]];
    auto node = std::move(owned_nodes.at(order[i]));
    node->graph_ = target;
    part_by_node.emplace(order[i], part_of[i]);
    target->nodes_.push_back(std::move(node));
  }
  for (auto& edge : owned_edges) {
    const int p = part_by_node.at(edge->nodes_.front());
    const bool internal = std::all_of(edge->nodes_.begin(), edge->nodes_.end(),
                                      [&](const OptiNode* n) { return part_by_node.at(n) == p; });
    OptiGraph* target = internal ? part_graph[p] : this;
    edge->graph_ = target;
    target->edges_.push_back(std::move(edge));
  }
  rebuild_edge_index();
  for (OptiGraph* g : part_graph) {
    if (g != nullptr) g->rebuild_edge_index();
  }
  touch();
}

std::unordered_map<const OptiNode*, int> node_positions(const OptiGraph& graph) {
  std::unordered_map<const OptiNode*, int> pos;
  int i = 0;
  for (const OptiNode* n : graph.all_nodes()) pos.emplace(n, i++);
  return pos;
}

}  // namespace optigraph
