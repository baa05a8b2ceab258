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

// Interior-point internals shared by the monolithic and structured solvers.

#pragma once

#include <memory>
#include <vector>

#include "optigraph/qp_solver.hpp"

namespace optigraph::ipm {

// min 0.5 w'Hw + c'w  s.t.  A w = b,  lower <= w <= upper
// where w = (x, s): one slack per inequality row. Rows are the equality
// rows, then a_in x - s = 0, then x_j = l_j for each fixed variable.
struct StandardQP {
  int num_flat = 0;  // leading columns of w that are FlatQP variables
  Eigen::SparseMatrix<double> h;
  Eigen::SparseMatrix<double> a;
  Eigen::VectorXd c;
  Eigen::VectorXd b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd start;
  int num_eq = 0;
  int num_in = 0;
  std::vector<int> fixed;  // FlatQP column of each fixed-variable row

  // Block of every column and row; rows with block -1 form the border.
  std::vector<int> col_block;
  std::vector<int> row_block;
  int num_blocks = 1;

  int cols() const { return static_cast<int>(c.size()); }
  int rows() const { return static_cast<int>(b.size()); }
};

// `block_of_var` gives a block per FlatQP column. Link rows go to the
// border, slacks and node rows follow their first variable's block. Without
// blocks everything is block 0.
StandardQP standardize(const FlatQP& qp, const std::vector<int>* block_of_var = nullptr);

// Primal-dual point in standard-form coordinates.
struct Iterate {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd z_lower;
  Eigen::VectorXd z_upper;
};

// Start values pushed inside their bounds, unit bound duals, zero y.
Iterate initial_iterate(const StandardQP& sqp);

// Solves [[H + diag(sigma) + reg I, A'], [A, -reg I]] [dx; dy] = rhs.
class KktBackend {
 public:
  virtual ~KktBackend() = default;
  // Returns false on a failed factorization or wrong inertia.
  virtual bool factor(const Eigen::VectorXd& sigma, double reg) = 0;
  virtual Eigen::VectorXd solve(const Eigen::VectorXd& rhs) = 0;
};

class MonolithicBackend : public KktBackend {
 public:
  explicit MonolithicBackend(const StandardQP& sqp);
  ~MonolithicBackend() override;
  bool factor(const Eigen::VectorXd& sigma, double reg) override;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Solution run(std::shared_ptr<const FlatQP> qp, const StandardQP& sqp, KktBackend& backend, const SolverOptions& opts);

}  // namespace optigraph::ipm
