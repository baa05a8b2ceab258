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
#include <functional>
#include <vector>

#include "optigraph/model.hpp"

namespace optigraph {

// Where a row of a FlatQP came from.
struct RowSource {
  enum class Kind { kNode, kLink };
  Kind kind = Kind::kNode;
  const OptiNode* node = nullptr;  // kNode
  const OptiEdge* edge = nullptr;  // kLink
  std::size_t index = 0;           // constraint index on the node or edge
};

// min 0.5 x'Hx + c'x + constant
// s.t. a_eq x = b_eq, in_lower <= a_in x <= in_upper, lower <= x <= upper.
// H is stored with both triangles. Rows from node constraints come first
// (recursive node order), then link rows (recursive edge order). A >= or <=
// constraint becomes an inequality row with one infinite side.
struct FlatQP {
  using SparseMatrix = Eigen::SparseMatrix<double>;

  SparseMatrix hessian;
  Eigen::VectorXd cost;
  double constant = 0.0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd start;
  SparseMatrix a_eq;
  Eigen::VectorXd b_eq;
  SparseMatrix a_in;
  Eigen::VectorXd in_lower;
  Eigen::VectorXd in_upper;

  std::vector<VarRef> var_map;
  std::vector<RowSource> eq_rows;
  std::vector<RowSource> in_rows;
  VarMap<int> var_index;

  int num_variables() const { return static_cast<int>(var_map.size()); }
  int num_eq() const { return static_cast<int>(eq_rows.size()); }
  int num_in() const { return static_cast<int>(in_rows.size()); }

  // Throws ReferenceError when `v` is not a column of this QP.
  int index_of(const VarRef& v) const;
  double objective(const Eigen::VectorXd& x) const;
};

// Incremental builder shared by flatten() and the Schwarz subproblems.
class QPAssembler {
 public:
  // Adds the node's variables, constraints and objective. Throws
  // ConvexityError when the node objective is not convex.
  void add_node(const OptiNode& node);
  // Adds a link row. All of its variables must already be registered.
  void add_link(const OptiEdge& edge, std::size_t index);
  // Adds a link row in which variables not registered here are replaced by
  // the constant `external(v)`.
  void add_link_with_fixed(const OptiEdge& edge, std::size_t index, const std::function<double(VarRef)>& external);
  void add_linear_cost(const VarRef& v, double coef);
  void add_constant(double c) { constant_ += c; }
  bool has_variable(const VarRef& v) const { return index_.count(v) != 0; }

  FlatQP finish();

 private:
  struct Row {
    RowSource source;
    std::vector<std::pair<int, double>> terms;
    Sense sense;
    double rhs;
  };

  void add_row(std::vector<Row>& rows, Row row);

  std::vector<VarRef> vars_;
  VarMap<int> index_;
  std::vector<double> lower_, upper_, start_, cost_;
  std::vector<Eigen::Triplet<double>> hessian_;
  std::vector<Row> node_rows_;
  std::vector<Row> link_rows_;
  double constant_ = 0.0;
};

// Collapses the graph into one QP over all recursive nodes and edges.
FlatQP flatten(const OptiGraph& graph);

}  // namespace optigraph
