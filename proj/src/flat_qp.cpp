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

#include "optigraph/flat_qp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "optigraph/error.hpp"

namespace optigraph {

namespace {

constexpr double kConvexityTol = 1e-10;

void check_convex(const OptiNode& node) {
  const auto& quad = node.objective().quadratic_terms();
  if (quad.empty()) return;
  const bool diagonal = std::all_of(quad.begin(), quad.end(), [](const QuadTerm& t) {
    return same_variable(t.first, t.second);
  });
  if (diagonal) {
    for (const auto& t : quad) {
      if (t.coef < -kConvexityTol) {
        throw ConvexityError("objective of node '" + node.name() + "' is not convex (negative curvature on '" +
                             node.variables()[t.first.index].name + "')");
      }
    }
    return;
  }
  const auto n = static_cast<Eigen::Index>(node.num_variables());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : quad) {
    const auto i = static_cast<Eigen::Index>(t.first.index);
    const auto j = static_cast<Eigen::Index>(t.second.index);
    if (i == j) {
      h(i, i) += 2.0 * t.coef;
    } else {
      h(i, j) += t.coef;
      h(j, i) += t.coef;
    }
  }
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  // Pivoted LDLT misjudges rank-deficient PSD matrices, so use eigenvalues.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -kConvexityTol * scale) {
    throw ConvexityError("objective of node '" + node.name() + "' is not convex (Hessian is not positive semidefinite)");
  }
}

FlatQP::SparseMatrix build_rows(const std::vector<std::vector<std::pair<int, double>>>& rows, int cols) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [c, v] : rows[r]) trip.emplace_back(static_cast<int>(r), c, v);
  }
  FlatQP::SparseMatrix m(static_cast<Eigen::Index>(rows.size()), cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace

int FlatQP::index_of(const VarRef& v) const {
  auto it = var_index.find(v);
  if (it == var_index.end()) {
    throw ReferenceError("variable " + std::to_string(v.index) + " of node '" +
                         (v.node ? v.node->name() : std::string("<null>")) + "' is not part of this problem");
  }
  return it->second;
}

double FlatQP::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + cost.dot(x) + constant;
}

void QPAssembler::add_node(const OptiNode& node) {
  check_convex(node);
  const int base = static_cast<int>(vars_.size());
  for (std::size_t i = 0; i < node.num_variables(); ++i) {
    const Variable& var = node.variables()[i];
    VarRef ref{&node, i};
    index_.emplace(ref, static_cast<int>(vars_.size()));
    vars_.push_back(ref);
    lower_.push_back(var.lower);
    upper_.push_back(var.upper);
    start_.push_back(var.start);
    cost_.push_back(0.0);
  }
  for (std::size_t c = 0; c < node.constraints().size(); ++c) {
    const NodeConstraint& con = node.constraints()[c];
    Row row{{RowSource::Kind::kNode, &node, nullptr, c}, {}, con.sense, con.rhs};
    for (const auto& [i, coef] : con.terms) row.terms.emplace_back(base + static_cast<int>(i), coef);
    add_row(node_rows_, std::move(row));
  }
  const QuadExpr& f = node.objective();
  for (const auto& [v, coef] : f.linear().terms()) cost_[base + v.index] += coef;
  constant_ += f.constant();
  for (const auto& t : f.quadratic_terms()) {
    const int i = base + static_cast<int>(t.first.index);
    const int j = base + static_cast<int>(t.second.index);
    if (i == j) {
      hessian_.emplace_back(i, i, 2.0 * t.coef);
    } else {
      hessian_.emplace_back(i, j, t.coef);
      hessian_.emplace_back(j, i, t.coef);
    }
  }
}

void QPAssembler::add_link(const OptiEdge& edge, std::size_t index) {
  const LinkConstraint& link = edge.link_constraints()[index];
  Row row{{RowSource::Kind::kLink, nullptr, &edge, index}, {}, link.sense, link.rhs};
  for (const auto& [v, coef] : link.terms) {
    auto it = index_.find(v);
    if (it == index_.end()) {
      throw IntegrityError("link constraint '" + link.name + "' references variable of node '" +
                           (v.node ? v.node->name() : std::string("<null>")) + "' outside the problem");
    }
    row.terms.emplace_back(it->second, coef);
  }
  add_row(link_rows_, std::move(row));
}

void QPAssembler::add_link_with_fixed(const OptiEdge& edge, std::size_t index,
                                      const std::function<double(VarRef)>& external) {
  const LinkConstraint& link = edge.link_constraints()[index];
  Row row{{RowSource::Kind::kLink, nullptr, &edge, index}, {}, link.sense, link.rhs};
  for (const auto& [v, coef] : link.terms) {
    auto it = index_.find(v);
    if (it == index_.end()) {
      row.rhs -= coef * external(v);
    } else {
      row.terms.emplace_back(it->second, coef);
    }
  }
  add_row(link_rows_, std::move(row));
}

void QPAssembler::add_linear_cost(const VarRef& v, double coef) {
  auto it = index_.find(v);
  if (it == index_.end()) throw IntegrityError("cost term on a variable outside the problem");
  cost_[it->second] += coef;
}

void QPAssembler::add_row(std::vector<Row>& rows, Row row) { rows.push_back(std::move(row)); }

FlatQP QPAssembler::finish() {
  FlatQP qp;
  const int n = static_cast<int>(vars_.size());
  qp.var_map = vars_;
  qp.var_index = index_;
  qp.lower = Eigen::Map<const Eigen::VectorXd>(lower_.data(), n);
  qp.upper = Eigen::Map<const Eigen::VectorXd>(upper_.data(), n);
  qp.start = Eigen::Map<const Eigen::VectorXd>(start_.data(), n);
  qp.cost = Eigen::Map<const Eigen::VectorXd>(cost_.data(), n);
  qp.constant = constant_;
  qp.hessian.resize(n, n);
  qp.hessian.setFromTriplets(hessian_.begin(), hessian_.end());
  qp.hessian.makeCompressed();

  std::vector<std::vector<std::pair<int, double>>> eq_terms, in_terms;
  std::vector<double> b_eq, lo, up;
  for (const auto* rows : {&node_rows_, &link_rows_}) {
    for (const Row& row : *rows) {
      if (row.sense == Sense::kEqual) {
        qp.eq_rows.push_back(row.source);
        eq_terms.push_back(row.terms);
        b_eq.push_back(row.rhs);
      } else {
        qp.in_rows.push_back(row.source);
        in_terms.push_back(row.terms);
        lo.push_back(row.sense == Sense::kGreaterEqual ? row.rhs : -kInfinity);
        up.push_back(row.sense == Sense::kLessEqual ? row.rhs : kInfinity);
      }
    }
  }
  qp.a_eq = build_rows(eq_terms, n);
  qp.a_in = build_rows(in_terms, n);
  qp.b_eq = Eigen::Map<const Eigen::VectorXd>(b_eq.data(), static_cast<Eigen::Index>(b_eq.size()));
  qp.in_lower = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  qp.in_upper = Eigen::Map<const Eigen::VectorXd>(up.data(), static_cast<Eigen::Index>(up.size()));
  return qp;
}

FlatQP flatten(const OptiGraph& graph) {
  QPAssembler assembler;
  for (const OptiNode* node : graph.all_nodes()) assembler.add_node(*node);
  for (const OptiEdge* edge : graph.all_edges()) {
    for (std::size_t i = 0; i < edge->link_constraints().size(); ++i) assembler.add_link(*edge, i);
  }
  return assembler.finish();
}

}  // namespace optigraph
