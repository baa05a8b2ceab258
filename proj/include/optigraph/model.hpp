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

// Hierarchical graph model: an OptiGraph owns OptiNodes (each a small QP
// subproblem), OptiEdges (hyperedges holding linear linking constraints) and
// nested subgraphs. Nodes are heap allocated and keep their address for the
// lifetime of the model, so `const OptiNode*` and `VarRef` are stable handles
// even when the hierarchy is reshaped by partitioning.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace optigraph {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

std::string_view to_string(Sense sense);

class OptiNode;
class OptiEdge;
class OptiGraph;

using GraphPtr = std::shared_ptr<OptiGraph>;

// Handle to the `index`-th variable of `node`.
struct VarRef {
  const OptiNode* node = nullptr;
  std::size_t index = 0;
};

inline bool same_variable(const VarRef& a, const VarRef& b) {
  return a.node == b.node && a.index == b.index;
}

struct VarRefHash {
  std::size_t operator()(const VarRef& v) const noexcept {
    return std::hash<const void*>()(v.node) ^ (std::hash<std::size_t>()(v.index) * 0x9e3779b97f4a7c15ULL);
  }
};

struct VarRefEqual {
  bool operator()(const VarRef& a, const VarRef& b) const noexcept { return same_variable(a, b); }
};

template <typename T>
using VarMap = std::unordered_map<VarRef, T, VarRefHash, VarRefEqual>;

// Affine expression. Terms keep the order in which variables first appear;
// repeated variables are merged into one coefficient.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
  LinExpr(VarRef var) { add_term(var, 1.0); }         // NOLINT(google-explicit-constructor)

  LinExpr& add_term(VarRef var, double coef);
  LinExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  const std::vector<std::pair<VarRef, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }

  // Value with variable values supplied by `value_of`.
  double evaluate(const std::function<double(VarRef)>& value_of) const;

  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr& operator*=(double scale);

 private:
  std::vector<std::pair<VarRef, double>> terms_;
  double constant_ = 0.0;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a);
LinExpr operator*(LinExpr a, double s);
LinExpr operator*(double s, LinExpr a);

struct QuadTerm {
  VarRef first;
  VarRef second;
  double coef = 0.0;
};

// Quadratic expression sum_k coef_k * first_k * second_k + linear part. Each
// unordered variable pair is stored once.
class QuadExpr {
 public:
  QuadExpr() = default;
  QuadExpr(LinExpr linear) : linear_(std::move(linear)) {}  // NOLINT(google-explicit-constructor)
  QuadExpr(double constant) : linear_(constant) {}          // NOLINT(google-explicit-constructor)

  QuadExpr& add_quadratic_term(VarRef a, VarRef b, double coef);

  const LinExpr& linear() const { return linear_; }
  LinExpr& linear() { return linear_; }
  const std::vector<QuadTerm>& quadratic_terms() const { return quad_; }
  double constant() const { return linear_.constant(); }

  double evaluate(const std::function<double(VarRef)>& value_of) const;

  QuadExpr& operator+=(const QuadExpr& other);
  QuadExpr& operator*=(double scale);

 private:
  LinExpr linear_;
  std::vector<QuadTerm> quad_;
};

QuadExpr operator+(QuadExpr a, const QuadExpr& b);
QuadExpr operator-(QuadExpr a, const QuadExpr& b);
QuadExpr operator*(QuadExpr a, double s);
QuadExpr operator*(double s, QuadExpr a);
QuadExpr operator*(const LinExpr& a, const LinExpr& b);
QuadExpr square(const LinExpr& e);

// `expr sense rhs` with the expression constant folded into rhs.
struct LinearConstraint {
  LinExpr expr;
  Sense sense = Sense::kEqual;
  double rhs = 0.0;
};

LinearConstraint operator<=(const LinExpr& lhs, const LinExpr& rhs);
LinearConstraint operator>=(const LinExpr& lhs, const LinExpr& rhs);
LinearConstraint operator==(const LinExpr& lhs, const LinExpr& rhs);

struct Variable {
  std::string name;
  double lower = -kInfinity;
  double upper = kInfinity;
  double start = 0.0;
};

// Linear constraint over the variables of a single node.
struct NodeConstraint {
  std::string name;
  std::vector<std::pair<std::size_t, double>> terms;  // (variable index, coefficient)
  Sense sense = Sense::kEqual;
  double rhs = 0.0;
};

// Linear constraint coupling variables of two or more nodes.
struct LinkConstraint {
  std::string name;
  std::vector<std::pair<VarRef, double>> terms;
  Sense sense = Sense::kEqual;
  double rhs = 0.0;
};

// Signed violation of `lhs sense rhs`: zero when satisfied.
double constraint_violation(double lhs, Sense sense, double rhs);

class OptiNode {
 public:
  OptiNode(const OptiNode&) = delete;
  OptiNode& operator=(const OptiNode&) = delete;

  const std::string& name() const { return name_; }
  // The graph this node is local to.
  const OptiGraph* graph() const { return graph_; }

  // Appends a variable. The start value defaults to 0 and is clamped into
  // [lower, upper]. Throws BoundError when lower > upper.
  VarRef add_variable(std::string name, double lower = -kInfinity, double upper = kInfinity,
                      std::optional<double> start = std::nullopt);

  std::size_t num_variables() const { return variables_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  VarRef variable(std::size_t index) const;
  // Throws ReferenceError for unknown names.
  VarRef variable(std::string_view name) const;
  VarRef operator[](std::string_view name) const { return variable(name); }
  std::optional<VarRef> find_variable(std::string_view name) const;

  // Adds a constraint whose terms all belong to this node. Returns its index.
  std::size_t add_constraint(const LinearConstraint& constraint, std::string name = {});
  const std::vector<NodeConstraint>& constraints() const { return constraints_; }

  // The node objective f_n (minimized). All terms must reference this node.
  void set_objective(QuadExpr objective);
  const QuadExpr& objective() const { return objective_; }

 private:
  friend class OptiGraph;

  OptiNode(OptiGraph* graph, std::string name) : graph_(graph), name_(std::move(name)) {}
  void check_local(const VarRef& v, std::string_view what) const;
  void touch();

  OptiGraph* graph_;
  std::string name_;
  std::vector<Variable> variables_;
  std::unordered_map<std::string, std::size_t> variable_index_;
  std::vector<NodeConstraint> constraints_;
  QuadExpr objective_;
};

class OptiEdge {
 public:
  OptiEdge(const OptiEdge&) = delete;
  OptiEdge& operator=(const OptiEdge&) = delete;

  // Supporting nodes in order of first appearance.
  const std::vector<const OptiNode*>& nodes() const { return nodes_; }
  const std::vector<LinkConstraint>& link_constraints() const { return links_; }
  const OptiGraph* graph() const { return graph_; }
  bool contains(const OptiNode* node) const;

 private:
  friend class OptiGraph;

  explicit OptiEdge(OptiGraph* graph) : graph_(graph) {}

  OptiGraph* graph_;
  std::vector<const OptiNode*> nodes_;
  std::vector<LinkConstraint> links_;
};

struct LinkRef {
  const OptiEdge* edge = nullptr;
  std::size_t index = 0;

  const LinkConstraint& get() const { return edge->link_constraints()[index]; }
  friend bool operator==(const LinkRef&, const LinkRef&) = default;
};

enum class Scope { kLocal, kRecursive };

template <typename Node, typename Edge, typename Graph>
struct BasicGraphElements {
  std::vector<Node*> nodes;
  std::vector<Edge*> edges;
  std::vector<Graph*> subgraphs;
};

using GraphElements = BasicGraphElements<const OptiNode, const OptiEdge, const OptiGraph>;

class OptiGraph {
 public:
  static GraphPtr create(std::string name = {});

  OptiGraph(const OptiGraph&) = delete;
  OptiGraph& operator=(const OptiGraph&) = delete;
  ~OptiGraph();

  const std::string& name() const { return name_; }
  const OptiGraph* parent() const { return parent_; }

  // Creates a node local to this graph. Unnamed nodes get "<graph>_n<i>".
  OptiNode& add_node(std::string name = {});

  // Adds a linking constraint. It is stored on the local edge whose node set
  // equals the constraint's span; the edge is created on first use.
  LinkRef add_link_constraint(const LinearConstraint& constraint, std::string name = {});

  // Attaches `child` as a subgraph. Throws HierarchyError on cycles or when
  // the child already has a parent.
  void add_subgraph(const GraphPtr& child);

  // Local elements.
  std::size_t num_local_nodes() const { return nodes_.size(); }
  std::size_t num_local_edges() const { return edges_.size(); }
  OptiNode& local_node(std::size_t i) { return *nodes_[i]; }
  const OptiNode& local_node(std::size_t i) const { return *nodes_[i]; }
  const OptiEdge& local_edge(std::size_t i) const { return *edges_[i]; }
  const std::vector<GraphPtr>& subgraphs() const { return subgraphs_; }

  // Nodes in depth-first order: local nodes, then each subgraph in insertion
  // order. Edges in post-order: subgraph edges before this graph's edges.
  std::vector<const OptiNode*> all_nodes() const;
  std::vector<OptiNode*> all_nodes();
  std::vector<const OptiEdge*> all_edges() const;
  std::vector<LinkRef> all_link_constraints() const;
  std::vector<const OptiGraph*> all_subgraphs() const;

  GraphElements query_elements(Scope scope) const;

  // True if `node` is local to this graph or to one of its descendants.
  bool contains(const OptiNode* node) const;
  bool contains(const OptiEdge* edge) const;
  // Top-level ancestor of this graph (this graph when unattached).
  const OptiGraph& root() const;

  // Bumped on every structural or model change to this graph or a descendant.
  std::uint64_t revision() const { return revision_; }

  // Replaces the hierarchy below this graph by one subgraph per non-empty
  // part. `part_of[i]` is the part of the i-th node of all_nodes(). Edges
  // whose nodes fall in one part move into that part's subgraph; the rest
  // become local edges of this graph. Prior subgraphs are discarded.
  void reform_subgraphs(const std::vector<int>& part_of, int num_parts);

 private:
  friend class OptiNode;

  explicit OptiGraph(std::string name) : name_(std::move(name)) {}

  void touch();
  void collect_nodes(std::vector<const OptiNode*>& out) const;
  void collect_edges(std::vector<const OptiEdge*>& out) const;
  void collect_subgraphs(std::vector<const OptiGraph*>& out) const;
  bool is_ancestor_of(const OptiGraph* g) const;
  OptiEdge& edge_for(const std::vector<const OptiNode*>& nodes);
  void rebuild_edge_index();

  std::string name_;
  OptiGraph* parent_ = nullptr;
  std::vector<std::unique_ptr<OptiNode>> nodes_;
  std::vector<std::unique_ptr<OptiEdge>> edges_;
  std::vector<GraphPtr> subgraphs_;
  std::map<std::vector<const OptiNode*>, OptiEdge*> edge_index_;
  std::uint64_t revision_ = 0;
};

inline GraphPtr new_graph(std::string name = {}) { return OptiGraph::create(std::move(name)); }

// Position of every node of all_nodes() keyed by node pointer.
std::unordered_map<const OptiNode*, int> node_positions(const OptiGraph& graph);

}  // namespace optigraph
