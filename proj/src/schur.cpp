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


#include "optigraph/schur.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/SparseQR>

#include "optigraph/error.hpp"
#include "parallel.hpp"

namespace optigraph {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;
using Ldlt = Eigen::SimplicialLDLT<SpMat, Eigen::Lower>;

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Block membership of every standard-form column and row, with the position
// inside the block's K matrix.
struct Layout {
  std::vector<std::vector<int>> cols;
  std::vector<std::vector<int>> rows;
  std::vector<int> link_rows;
  std::vector<int> col_pos;
  std::vector<int> row_pos;   // position in K for node rows, border index for link rows

  int dim(int n) const { return static_cast<int>(cols[n].size() + rows[n].size()); }
  int num_blocks() const { return static_cast<int>(cols.size()); }
};

Layout make_layout(const ipm::StandardQP& s) {
  Layout l;
  l.cols.resize(s.num_blocks);
  l.rows.resize(s.num_blocks);
  l.col_pos.assign(s.cols(), 0);
  l.row_pos.assign(s.rows(), 0);
  for (int j = 0; j < s.cols(); ++j) {
    auto& c = l.cols[s.col_block[j]];
    l.col_pos[j] = static_cast<int>(c.size());
    c.push_back(j);
  }
  for (int i = 0; i < s.rows(); ++i) {
    if (s.row_block[i] < 0) {
      l.row_pos[i] = static_cast<int>(l.link_rows.size());
      l.link_rows.push_back(i);
    } else {
      auto& r = l.rows[s.row_block[i]];
      l.row_pos[i] = static_cast<int>(l.cols[s.row_block[i]].size() + r.size());
      r.push_back(i);
    }
  }
  return l;
}

// Fixed parts of each K_n (off-diagonal H and node rows) and B_n.
struct BlockPattern {
  std::vector<Triplets> k;
  std::vector<Triplets> b;
  std::vector<std::vector<int>> link_cols;  // border indices touching each block
};

BlockPattern make_pattern(const ipm::StandardQP& s, const Layout& l) {
  const int nb = l.num_blocks();
  BlockPattern p;
  p.k.resize(nb);
  p.b.resize(nb);
  p.link_cols.resize(nb);
  for (int j = 0; j < s.h.outerSize(); ++j) {
    for (SpMat::InnerIterator it(s.h, j); it; ++it) {
      const int bi = s.col_block[it.row()];
      if (bi != s.col_block[it.col()]) throw StructureError("objective couples variables of different nodes");
      if (it.row() != it.col()) p.k[bi].emplace_back(l.col_pos[it.row()], l.col_pos[it.col()], it.value());
    }
  }
  for (int j = 0; j < s.a.outerSize(); ++j) {
    for (SpMat::InnerIterator it(s.a, j); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int col = static_cast<int>(it.col());
      const int bi = s.col_block[col];
      if (s.row_block[i] < 0) {
        p.b[bi].emplace_back(l.col_pos[col], l.row_pos[i], it.value());
        p.link_cols[bi].push_back(l.row_pos[i]);
      } else {
        if (s.row_block[i] != bi) throw StructureError("node constraint spans several top-level nodes");
        p.k[bi].emplace_back(l.row_pos[i], l.col_pos[col], it.value());
        p.k[bi].emplace_back(l.col_pos[col], l.row_pos[i], it.value());
      }
    }
  }
  for (auto& lc : p.link_cols) {
    std::sort(lc.begin(), lc.end());
    lc.erase(std::unique(lc.begin(), lc.end()), lc.end());
  }
  return p;
}

SpMat build_k(const ipm::StandardQP& s, const Layout& l, const BlockPattern& p, int n, const Eigen::VectorXd& sigma,
              double reg) {
  Triplets trip = p.k[n];
  for (int j : l.cols[n]) trip.emplace_back(l.col_pos[j], l.col_pos[j], s.h.coeff(j, j) + sigma[j] + reg);
  for (int i : l.rows[n]) trip.emplace_back(l.row_pos[i], l.row_pos[i], -reg);
  SpMat k(l.dim(n), l.dim(n));
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

SpMat build_b(const Layout& l, const BlockPattern& p, int n) {
  SpMat b(l.dim(n), static_cast<int>(l.link_rows.size()));
  b.setFromTriplets(p.b[n].begin(), p.b[n].end());
  return b;
}

// Dense columns `cols` of sparse matrix b.
Eigen::MatrixXd dense_columns(const SpMat& b, const std::vector<int>& cols) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(b.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t t = 0; t < cols.size(); ++t) {
    for (SpMat::InnerIterator it(b, cols[t]); it; ++it) out(it.row(), static_cast<Eigen::Index>(t)) = it.value();
  }
  return out;
}

// Y'D^-1Y for Y = L^-1 P B, mirrored so the result is exactly symmetric.
Eigen::MatrixXd schur_term(const Ldlt& ldlt, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd y = ldlt.permutationP() * b;
  ldlt.matrixL().solveInPlace(y);
  const Eigen::MatrixXd z = ldlt.vectorD().cwiseInverse().asDiagonal() * y;
  Eigen::MatrixXd c = y.transpose() * z;
  c.triangularView<Eigen::StrictlyLower>() = c.transpose().triangularView<Eigen::StrictlyLower>();
  return c;
}

std::string link_name(const FlatQP& qp, const ipm::StandardQP& s, int row) {
  const RowSource* src = nullptr;
  if (row < s.num_eq) {
    src = &qp.eq_rows[row];
  } else if (row < s.num_eq + s.num_in) {
    src = &qp.in_rows[row - s.num_eq];
  }
  if (src == nullptr || src->edge == nullptr) return "row " + std::to_string(row);
  const std::string& name = src->edge->link_constraints()[src->index].name;
  return name.empty() ? "link " + std::to_string(src->index) + " of an edge" : name;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

// Throws RankError when the link rows are linearly dependent.
void check_link_rank(const FlatQP& qp, const ipm::StandardQP& s, const Layout& l) {
  const int m = static_cast<int>(l.link_rows.size());
  if (m == 0) return;
  if (m > kMaxSchurDim) {
    throw StructureError(std::to_string(m) + " link rows exceed the Schur limit of " + std::to_string(kMaxSchurDim) +
                         "; use a partition with fewer crossing links");
  }
  Triplets trip;
  for (int j = 0; j < s.a.outerSize(); ++j) {
    for (SpMat::InnerIterator it(s.a, j); it; ++it) {
      if (s.row_block[it.row()] < 0) trip.emplace_back(j, l.row_pos[it.row()], it.value());
    }
  }
  SpMat at(s.cols(), m);
  at.setFromTriplets(trip.begin(), trip.end());
  at.makeCompressed();
  Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr(at);
  if (qr.info() != Eigen::Success) throw RankError("QR factorization of the link rows failed");
  if (qr.rank() < m) {
    std::vector<std::string> names;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index t = qr.rank(); t < m; ++t) names.push_back(link_name(qp, s, l.link_rows[perm[t]]));
    throw RankError("linking constraints are linearly dependent; redundant: " + join(names));
  }
}

}  // namespace

ipm::StandardQP structured_form(const FlatQP& qp, const OptiGraph& graph) {
  for (const GraphPtr& sub : graph.subgraphs()) {
    if (!sub->all_nodes().empty()) {
      throw StructureError("graph '" + graph.name() + "' has nodes inside subgraph '" + sub->name() +
                           "'; aggregate it before a structured solve");
    }
  }
  std::unordered_map<const OptiNode*, int> block;
  for (std::size_t i = 0; i < graph.num_local_nodes(); ++i) block[&graph.local_node(i)] = static_cast<int>(i);
  std::vector<int> block_of_var(qp.num_variables());
  for (int j = 0; j < qp.num_variables(); ++j) block_of_var[j] = block.at(qp.var_map[j].node);
  ipm::StandardQP s = ipm::standardize(qp, &block_of_var);
  s.num_blocks = std::max(1, static_cast<int>(graph.num_local_nodes()));
  return s;
}

KKTBlocks assemble_blocks(const ipm::StandardQP& s, const ipm::Iterate& it, double reg,
                          const std::vector<std::string>& names) {
  const Layout l = make_layout(s);
  const BlockPattern p = make_pattern(s, l);
  const int n = s.cols();
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(s.lower[j])) sigma[j] += it.z_lower[j] / (it.x[j] - s.lower[j]);
    if (std::isfinite(s.upper[j])) sigma[j] += it.z_upper[j] / (s.upper[j] - it.x[j]);
  }
  const Eigen::VectorXd r_d = s.h * it.x + s.c + s.a.transpose() * it.y - it.z_lower + it.z_upper;
  const Eigen::VectorXd r_p = s.a * it.x - s.b;
  KKTBlocks kb;
  kb.reg = reg;
  kb.link_rows = l.link_rows;
  kb.cols = l.cols;
  kb.rows = l.rows;
  for (int b = 0; b < l.num_blocks(); ++b) {
    kb.names.push_back(b < static_cast<int>(names.size()) ? names[b] : "block " + std::to_string(b));
    kb.k.push_back(build_k(s, l, p, b, sigma, reg));
    kb.b.push_back(build_b(l, p, b));
    Eigen::VectorXd r(l.dim(b));
    for (int j : l.cols[b]) r[l.col_pos[j]] = r_d[j];
    for (int i : l.rows[b]) r[l.row_pos[i]] = r_p[i];
    kb.r.push_back(std::move(r));
  }
  kb.r_links.resize(kb.link_count());
  for (int t = 0; t < kb.link_count(); ++t) kb.r_links[t] = r_p[l.link_rows[t]];
  return kb;
}

KKTBlocks assemble_blocks(const OptiGraph& graph, double reg) {
  const FlatQP qp = flatten(graph);
  const ipm::StandardQP s = structured_form(qp, graph);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < graph.num_local_nodes(); ++i) names.push_back(graph.local_node(i).name());
  KKTBlocks kb = assemble_blocks(s, ipm::initial_iterate(s), reg, names);
  for (int t = 0; t < kb.link_count(); ++t) kb.link_names.push_back(link_name(qp, s, kb.link_rows[t]));
  return kb;
}

SchurStep schur_solve(const KKTBlocks& kb) {
  const int nb = static_cast<int>(kb.k.size());
  const int m = kb.link_count();
  std::vector<std::unique_ptr<Ldlt>> ldlt(nb);
  SchurStep step;
  step.s = -kb.reg * Eigen::MatrixXd::Identity(m, m);
  for (int n = 0; n < nb; ++n) {
    if (kb.k[n].rows() == 0) continue;
    ldlt[n] = std::make_unique<Ldlt>(kb.k[n]);
    const Eigen::VectorXd d = ldlt[n]->vectorD();
    if (ldlt[n]->info() != Eigen::Success || !d.allFinite() || (d.array() == 0.0).any()) {
      throw RankError("KKT block of node '" + kb.names[n] + "' is singular");
    }
    step.s -= schur_term(*ldlt[n], Eigen::MatrixXd(kb.b[n]));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  if (m > 0) {
    qr.setThreshold(1e-12);
    qr.compute(step.s);
    if (qr.rank() < m) {
      std::vector<std::string> names;
      for (int k = static_cast<int>(qr.rank()); k < m; ++k) {
        const int idx = qr.colsPermutation().indices()[k];
        names.push_back(idx < static_cast<int>(kb.link_names.size()) ? kb.link_names[idx]
                                                                     : "link row " + std::to_string(idx));
      }
      throw RankError("Schur complement is singular; redundant links: " + join(names));
    }
  }

  // One pass of K_n dw_n + B_n dl = f_n, sum B_n' dw_n - reg dl = f_links.
  auto solve = [&](const std::vector<Eigen::VectorXd>& f, const Eigen::VectorXd& f_links,
                   std::vector<Eigen::VectorXd>& dw, Eigen::VectorXd& dl) {
    std::vector<Eigen::VectorXd> t(nb);
    Eigen::VectorXd g = f_links;
    for (int n = 0; n < nb; ++n) {
      if (kb.k[n].rows() == 0) continue;
      t[n] = ldlt[n]->solve(f[n]);
      g -= kb.b[n].transpose() * t[n];
    }
    dl = m > 0 ? Eigen::VectorXd(qr.solve(g)) : Eigen::VectorXd(0);
    dw.assign(nb, Eigen::VectorXd(0));
    for (int n = 0; n < nb; ++n) {
      if (kb.k[n].rows() == 0) continue;
      dw[n] = ldlt[n]->solve(Eigen::VectorXd(f[n] - kb.b[n] * dl));
    }
  };
  // Residuals f - M [dw; dl] and their max norm.
  auto residual = [&](const std::vector<Eigen::VectorXd>& f, const Eigen::VectorXd& f_links,
                      const std::vector<Eigen::VectorXd>& dw, const Eigen::VectorXd& dl,
                      std::vector<Eigen::VectorXd>& e, Eigen::VectorXd& e_links) {
    e.assign(nb, Eigen::VectorXd(0));
    e_links = f_links + kb.reg * dl;
    double worst = 0.0;
    for (int n = 0; n < nb; ++n) {
      if (kb.k[n].rows() == 0) continue;
      e[n] = f[n] - kb.k[n] * dw[n] - kb.b[n] * dl;
      e_links -= kb.b[n].transpose() * dw[n];
      worst = std::max(worst, inf_norm(e[n]));
    }
    return std::max(worst, inf_norm(e_links));
  };

  std::vector<Eigen::VectorXd> f(nb);
  double scale = inf_norm(kb.r_links);
  for (int n = 0; n < nb; ++n) {
    f[n] = -kb.r[n];
    scale = std::max(scale, inf_norm(kb.r[n]));
  }
  const Eigen::VectorXd f_links = -kb.r_links;
  solve(f, f_links, step.dw, step.dlambda);
  std::vector<Eigen::VectorXd> e;
  Eigen::VectorXd e_links;
  double res = residual(f, f_links, step.dw, step.dlambda, e, e_links);
  for (int k = 0; k < 10 && res > 1e-15 * (1.0 + scale); ++k) {
    std::vector<Eigen::VectorXd> cw, ew;
    Eigen::VectorXd cl, el;
    solve(e, e_links, cw, cl);
    std::vector<Eigen::VectorXd> dw = step.dw;
    for (int n = 0; n < nb; ++n) {
      if (dw[n].size()) dw[n] += cw[n];
    }
    const Eigen::VectorXd dl = step.dlambda + cl;
    const double cand = residual(f, f_links, dw, dl, ew, el);
    if (!(cand < res)) break;
    step.dw = std::move(dw);
    step.dlambda = dl;
    e = std::move(ew);
    e_links = std::move(el);
    res = cand;
  }
  step.residual = res / (1.0 + scale);
  return step;
}

namespace ipm {

struct SchurBackend::Impl {
  const StandardQP& sqp;
  int threads;
  Layout layout;
  BlockPattern pattern;
  std::vector<SpMat> b;
  std::vector<Eigen::MatrixXd> b_dense;  // columns link_cols[n] of B_n
  std::vector<std::unique_ptr<Ldlt>> ldlt;
  std::vector<char> analyzed;
  std::vector<SpMat> k;
  std::vector<Eigen::MatrixXd> x;  // K_n^-1 B_n on link_cols[n]
  Eigen::MatrixXd s;
  Eigen::LLT<Eigen::MatrixXd> neg_s;

  Impl(const StandardQP& q, int t) : sqp(q), threads(t), layout(make_layout(q)), pattern(make_pattern(q, layout)) {
    const int nb = layout.num_blocks();
    for (int n = 0; n < nb; ++n) ldlt.push_back(std::make_unique<Ldlt>());
    analyzed.assign(nb, 0);
    k.resize(nb);
    x.resize(nb);
    for (int n = 0; n < nb; ++n) {
      b.push_back(build_b(layout, pattern, n));
      b_dense.push_back(dense_columns(b[n], pattern.link_cols[n]));
    }
  }
};

SchurBackend::SchurBackend(const StandardQP& sqp, int threads) : impl_(std::make_unique<Impl>(sqp, threads)) {}
SchurBackend::~SchurBackend() = default;

bool SchurBackend::factor(const Eigen::VectorXd& sigma, double reg) {
  Impl& im = *impl_;
  const Layout& l = im.layout;
  const int nb = l.num_blocks();
  std::vector<char> ok(nb, 1);
  std::vector<Eigen::MatrixXd> terms(nb);
  detail::parallel_for(nb, im.threads, [&](int n) {
    if (l.dim(n) == 0) return;
    im.k[n] = build_k(im.sqp, l, im.pattern, n, sigma, reg);
    if (!im.analyzed[n]) {
      im.ldlt[n]->analyzePattern(im.k[n]);
      im.analyzed[n] = 1;
    }
    im.ldlt[n]->factorize(im.k[n]);
    if (im.ldlt[n]->info() != Eigen::Success) {
      ok[n] = 0;
      return;
    }
    const Eigen::VectorXd d = im.ldlt[n]->vectorD();
    const auto pos = (d.array() > 0).count();
    const auto neg = (d.array() < 0).count();
    if (!d.allFinite() || pos != static_cast<Eigen::Index>(l.cols[n].size()) ||
        neg != static_cast<Eigen::Index>(l.rows[n].size())) {
      ok[n] = 0;
      return;
    }
    if (im.b_dense[n].cols() > 0) {
      terms[n] = schur_term(*im.ldlt[n], im.b_dense[n]);
      im.x[n] = im.ldlt[n]->solve(im.b_dense[n]);
    }
  });
  if (std::find(ok.begin(), ok.end(), 0) != ok.end()) return false;
  const int m = static_cast<int>(l.link_rows.size());
  im.s = -reg * Eigen::MatrixXd::Identity(m, m);
  for (int n = 0; n < nb; ++n) {
    const auto& lc = im.pattern.link_cols[n];
    for (std::size_t a = 0; a < lc.size(); ++a) {
      for (std::size_t c = 0; c < lc.size(); ++c) {
        im.s(lc[a], lc[c]) -= terms[n](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
      }
    }
  }
  if (m == 0) return true;
  im.neg_s.compute(-im.s);
  return im.neg_s.info() == Eigen::Success && im.neg_s.matrixLLT().diagonal().allFinite();
}

Eigen::VectorXd SchurBackend::solve(const Eigen::VectorXd& rhs) {
  Impl& im = *impl_;
  const Layout& l = im.layout;
  const StandardQP& s = im.sqp;
  const int nb = l.num_blocks();
  const int n = s.cols();
  const int m = static_cast<int>(l.link_rows.size());
  std::vector<Eigen::VectorXd> t(nb);
  detail::parallel_for(nb, im.threads, [&](int b) {
    if (l.dim(b) == 0) return;
    Eigen::VectorXd r(l.dim(b));
    for (int j : l.cols[b]) r[l.col_pos[j]] = rhs[j];
    for (int i : l.rows[b]) r[l.row_pos[i]] = rhs[n + i];
    t[b] = im.ldlt[b]->solve(r);
  });
  Eigen::VectorXd g(m);
  for (int k = 0; k < m; ++k) g[k] = rhs[n + l.link_rows[k]];
  for (int b = 0; b < nb; ++b) {
    if (l.dim(b) == 0) continue;
    g -= im.b[b].transpose() * t[b];
  }
  const Eigen::VectorXd dl = m > 0 ? Eigen::VectorXd(-im.neg_s.solve(g)) : Eigen::VectorXd(0);
  Eigen::VectorXd v(n + s.rows());
  for (int k = 0; k < m; ++k) v[n + l.link_rows[k]] = dl[k];
  for (int b = 0; b < nb; ++b) {
    if (l.dim(b) == 0) continue;
    Eigen::VectorXd w = t[b];
    const auto& lc = im.pattern.link_cols[b];
    if (!lc.empty()) {
      Eigen::VectorXd dl_b(static_cast<Eigen::Index>(lc.size()));
      for (std::size_t a = 0; a < lc.size(); ++a) dl_b[static_cast<Eigen::Index>(a)] = dl[lc[a]];
      w -= im.x[b] * dl_b;
    }
    for (int j : l.cols[b]) v[j] = w[l.col_pos[j]];
    for (int i : l.rows[b]) v[n + i] = w[l.row_pos[i]];
  }
  return v;
}

const Eigen::MatrixXd& SchurBackend::schur_matrix() const { return impl_->s; }

}  // namespace ipm

Solution solve_structured(const OptiGraph& graph, const SolverOptions& opts) {
  auto qp = std::make_shared<const FlatQP>(flatten(graph));
  const ipm::StandardQP sqp = structured_form(*qp, graph);
  check_link_rank(*qp, sqp, make_layout(sqp));
  ipm::SchurBackend backend(sqp, opts.threads);
  return ipm::run(qp, sqp, backend, opts);
}

}  // namespace optigraph
