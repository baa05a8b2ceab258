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


// Schur-complement solution of the block-bordered KKT system. Each top-level
// node is one diagonal block; link rows form the border.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "optigraph/ipm.hpp"
#include "optigraph/model.hpp"
#include "optigraph/qp_solver.hpp"

namespace optigraph {

// Largest border (number of link rows) the dense Schur complement accepts.
inline constexpr int kMaxSchurDim = 20000;

// Blocks of [[K_1, .., B_1], .., [B_1', .., -reg I]] [dw; dl] = -[r; r_links].
// The columns and rows of each block are standard-form indices: primal
// columns first, then node rows.
struct KKTBlocks {
  std::vector<std::string> names;
  std::vector<std::vector<int>> cols;
  std::vector<std::vector<int>> rows;
  std::vector<Eigen::SparseMatrix<double>> k;  // K_n, both triangles
  std::vector<Eigen::SparseMatrix<double>> b;  // dim(K_n) x link_count
  std::vector<Eigen::VectorXd> r;
  Eigen::VectorXd r_links;
  std::vector<int> link_rows;  // standard-form row of each border row
  std::vector<std::string> link_names;
  double reg = 0.0;

  int link_count() const { return static_cast<int>(link_rows.size()); }
};

struct SchurStep {
  std::vector<Eigen::VectorXd> dw;  // per block, ordered like KKTBlocks::cols then rows
  Eigen::VectorXd dlambda;
  Eigen::MatrixXd s;                // Schur complement
  double residual = 0.0;            // relative multiply-back residual
};

// Standard form with one block per top-level node. Throws StructureError when
// the graph still has nodes inside subgraphs.
ipm::StandardQP structured_form(const FlatQP& qp, const OptiGraph& graph);

// Blocks at `iterate`; residuals are the IPM's dual and primal residuals and
// the diagonal carries the barrier terms z/gap.
KKTBlocks assemble_blocks(const ipm::StandardQP& sqp, const ipm::Iterate& iterate, double reg,
                          const std::vector<std::string>& names = {});
// Same, at the IPM starting point of the flattened graph.
KKTBlocks assemble_blocks(const OptiGraph& graph, double reg = 0.0);

// Solves the bordered system. Throws RankError naming the block when a K_n
// cannot be factorized, or naming redundant links when S is singular.
SchurStep schur_solve(const KKTBlocks& blocks);

// Interior-point solve where every Newton step goes through the Schur
// complement. Same contract as solve_monolithic; step_residuals holds the
// multiply-back residual of each step. Throws RankError on linearly
// dependent links.
Solution solve_structured(const OptiGraph& graph, const SolverOptions& opts = {});

namespace ipm {

class SchurBackend : public KktBackend {
 public:
  SchurBackend(const StandardQP& sqp, int threads);
  ~SchurBackend() override;
  bool factor(const Eigen::VectorXd& sigma, double reg) override;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) override;
  // Schur complement of the last factorization.
  const Eigen::MatrixXd& schur_matrix() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ipm

}  // namespace optigraph
