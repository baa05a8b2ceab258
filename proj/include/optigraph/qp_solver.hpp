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

#include <map>
#include <memory>
#include <string_view>
#include <vector>

#include "optigraph/flat_qp.hpp"

namespace optigraph {

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double regularization = 1e-8;
  double max_regularization = 1e-4;
  double fraction_to_boundary = 0.995;
  // Worker threads for per-node work in the structured solver.
  int threads = 1;
};

enum class SolveStatus { kOptimal, kInfeasible, kIterationLimit, kNumericalError };

std::string_view to_string(SolveStatus status);

// Primal-dual result. Multipliers follow the convention
//   grad f(x) + A_eq' y_eq + A_in' y_in - z_lower + z_upper = 0,
// so y_in >= 0 on active upper sides (<= rows) and y_in <= 0 on active
// lower sides (>= rows); z_lower, z_upper >= 0.
struct Solution {
  SolveStatus status = SolveStatus::kNumericalError;
  int iterations = 0;
  double objective = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_in;
  Eigen::VectorXd z_lower;
  Eigen::VectorXd z_upper;
  std::shared_ptr<const FlatQP> qp;
  // Relative multiply-back residual of each Newton step (structured solver).
  std::vector<double> step_residuals;

  bool optimal() const { return status == SolveStatus::kOptimal; }
  double value(const VarRef& v) const;
  // Multiplier of a link or node constraint row.
  double link_dual(const LinkRef& link) const;
  double node_dual(const OptiNode* node, std::size_t index) const;

  // Builds the row lookup used by link_dual/node_dual. Called by the solvers.
  void index_rows();

 private:
  double row_dual(const void* owner, std::size_t index) const;
  std::map<std::pair<const void*, std::size_t>, std::pair<bool, int>> row_index_;
};

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
  double max() const;
};

// Infinity norms of the optimality conditions at a primal-dual point.
// Bound and inequality violations count toward `primal`; multipliers of the
// wrong sign count toward `complementarity`.
KktResiduals kkt_residuals(const FlatQP& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y_eq,
                           const Eigen::VectorXd& y_in, const Eigen::VectorXd& z_lower,
                           const Eigen::VectorXd& z_upper);
KktResiduals kkt_residuals(const Solution& solution);

Solution solve_monolithic(std::shared_ptr<const FlatQP> qp, const SolverOptions& opts = {});
Solution solve_monolithic(const FlatQP& qp, const SolverOptions& opts = {});

}  // namespace optigraph
