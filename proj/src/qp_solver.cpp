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

// Mehrotra predictor-corrector interior-point method for convex QPs.

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "optigraph/error.hpp"
#include "optigraph/ipm.hpp"

namespace optigraph {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kIterationLimit:
      return "iteration_limit";
    case SolveStatus::kNumericalError:
      return "numerical_error";
  }
  return "unknown";
}

double Solution::value(const VarRef& v) const { return x[qp->index_of(v)]; }

void Solution::index_rows() {
  row_index_.clear();
  if (!qp) return;
  auto owner = [](const RowSource& s) -> const void* {
    return s.kind == RowSource::Kind::kNode ? static_cast<const void*>(s.node) : static_cast<const void*>(s.edge);
  };
  for (int i = 0; i < qp->num_eq(); ++i) row_index_[{owner(qp->eq_rows[i]), qp->eq_rows[i].index}] = {true, i};
  for (int i = 0; i < qp->num_in(); ++i) row_index_[{owner(qp->in_rows[i]), qp->in_rows[i].index}] = {false, i};
}

double Solution::row_dual(const void* owner, std::size_t index) const {
  auto it = row_index_.find({owner, index});
  if (it == row_index_.end()) throw ReferenceError("constraint is not part of this solution");
  return it->second.first ? y_eq[it->second.second] : y_in[it->second.second];
}

double Solution::link_dual(const LinkRef& link) const { return row_dual(link.edge, link.index); }

double Solution::node_dual(const OptiNode* node, std::size_t index) const { return row_dual(node, index); }

double KktResiduals::max() const { return std::max({stationarity, primal, complementarity}); }

KktResiduals kkt_residuals(const FlatQP& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y_eq,
                           const Eigen::VectorXd& y_in, const Eigen::VectorXd& z_lower,
                           const Eigen::VectorXd& z_upper) {
  KktResiduals r;
  const Eigen::VectorXd grad = qp.hessian * x + qp.cost + qp.a_eq.transpose() * y_eq + qp.a_in.transpose() * y_in -
                               z_lower + z_upper;
  r.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;

  if (qp.num_eq() > 0) r.primal = (qp.a_eq * x - qp.b_eq).cwiseAbs().maxCoeff();
  const Eigen::VectorXd ax = qp.a_in * x;
  for (int i = 0; i < qp.num_in(); ++i) {
    r.primal = std::max({r.primal, qp.in_lower[i] - ax[i], ax[i] - qp.in_upper[i]});
    const double y = y_in[i];
    if (y > 0) {
      const double gap = qp.in_upper[i] - ax[i];
      r.complementarity = std::max(r.complementarity, std::isfinite(gap) ? std::abs(y * gap) : y);
    } else if (y < 0) {
      const double gap = ax[i] - qp.in_lower[i];
      r.complementarity = std::max(r.complementarity, std::isfinite(gap) ? std::abs(y * gap) : -y);
    }
  }
  for (int j = 0; j < qp.num_variables(); ++j) {
    r.primal = std::max({r.primal, qp.lower[j] - x[j], x[j] - qp.upper[j]});
    const double gl = x[j] - qp.lower[j];
    const double gu = qp.upper[j] - x[j];
    const double zl = z_lower[j];
    const double zu = z_upper[j];
    r.complementarity = std::max(r.complementarity, std::max(-zl, 0.0) + std::max(-zu, 0.0));
    if (zl > 0) r.complementarity = std::max(r.complementarity, std::isfinite(gl) ? std::abs(zl * gl) : zl);
    if (zu > 0) r.complementarity = std::max(r.complementarity, std::isfinite(gu) ? std::abs(zu * gu) : zu);
  }
  return r;
}

KktResiduals kkt_residuals(const Solution& s) { return kkt_residuals(*s.qp, s.x, s.y_eq, s.y_in, s.z_lower, s.z_upper); }

namespace ipm {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

constexpr double kBoundPush = 1.0;
constexpr double kBoundFrac = 0.2;
constexpr double kDivergence = 1e10;
constexpr int kStallWindow = 20;
constexpr int kRefineSteps = 10;
// Largest relative residual of an accepted Newton step.
constexpr double kStepAccuracy = 1e-6;

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Largest step in (0, 1] keeping v + a*dv >= 0 on the masked entries,
// scaled by `frac`.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, const std::vector<char>& mask, double frac) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (mask[i] && dv[i] < 0) alpha = std::min(alpha, -frac * v[i] / dv[i]);
  }
  return alpha;
}

}  // namespace

StandardQP standardize(const FlatQP& qp, const std::vector<int>* block_of_var) {
  StandardQP s;
  const int nf = qp.num_variables();
  const int ni = qp.num_in();
  const int ne = qp.num_eq();
  const int n = nf + ni;
  s.num_flat = nf;
  s.num_eq = ne;
  s.num_in = ni;

  s.h.resize(n, n);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < qp.hessian.outerSize(); ++k) {
      for (SpMat::InnerIterator it(qp.hessian, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    }
    s.h.setFromTriplets(trip.begin(), trip.end());
  }
  s.c = Eigen::VectorXd::Zero(n);
  s.c.head(nf) = qp.cost;
  s.lower.resize(n);
  s.upper.resize(n);
  s.lower << qp.lower, qp.in_lower;
  s.upper << qp.upper, qp.in_upper;
  for (int j = 0; j < nf; ++j) {
    if (qp.lower[j] == qp.upper[j]) {
      s.fixed.push_back(j);
      s.lower[j] = -kInfinity;
      s.upper[j] = kInfinity;
    }
  }
  s.start.resize(n);
  s.start.head(nf) = qp.start;
  s.start.tail(ni) = qp.a_in * qp.start;

  const int nfix = static_cast<int>(s.fixed.size());
  const int m = ne + ni + nfix;
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < qp.a_eq.outerSize(); ++k) {
    for (SpMat::InnerIterator it(qp.a_eq, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  for (int k = 0; k < qp.a_in.outerSize(); ++k) {
    for (SpMat::InnerIterator it(qp.a_in, k); it; ++it) trip.emplace_back(ne + it.row(), it.col(), it.value());
  }
  for (int i = 0; i < ni; ++i) trip.emplace_back(ne + i, nf + i, -1.0);
  for (int k = 0; k < nfix; ++k) trip.emplace_back(ne + ni + k, s.fixed[k], 1.0);
  s.a.resize(m, n);
  s.a.setFromTriplets(trip.begin(), trip.end());
  s.a.makeCompressed();
  s.b = Eigen::VectorXd::Zero(m);
  s.b.head(ne) = qp.b_eq;
  for (int k = 0; k < nfix; ++k) s.b[ne + ni + k] = qp.lower[s.fixed[k]];

  s.col_block.assign(n, 0);
  s.row_block.assign(m, 0);
  if (block_of_var == nullptr) return s;

  int blocks = 1;
  for (int j = 0; j < nf; ++j) {
    s.col_block[j] = (*block_of_var)[j];
    blocks = std::max(blocks, s.col_block[j] + 1);
  }
  s.num_blocks = blocks;
  const RowMat eq_rows = qp.a_eq;
  const RowMat in_rows = qp.a_in;
  auto first_block = [&](const RowMat& mat, int row) {
    RowMat::InnerIterator it(mat, row);
    return it ? s.col_block[it.col()] : 0;
  };
  for (int i = 0; i < ne; ++i) {
    s.row_block[i] = qp.eq_rows[i].kind == RowSource::Kind::kLink ? -1 : first_block(eq_rows, i);
  }
  for (int i = 0; i < ni; ++i) {
    s.col_block[nf + i] = first_block(in_rows, i);
    s.row_block[ne + i] = qp.in_rows[i].kind == RowSource::Kind::kLink ? -1 : s.col_block[nf + i];
  }
  for (int k = 0; k < nfix; ++k) s.row_block[ne + ni + k] = s.col_block[s.fixed[k]];
  return s;
}

struct MonolithicBackend::Impl {
  const StandardQP& sqp;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  bool analyzed = false;
  std::vector<Eigen::Triplet<double>> base;  // lower triangle of H and the A block

  explicit Impl(const StandardQP& s) : sqp(s) {
    const int n = s.cols();
    for (int k = 0; k < s.h.outerSize(); ++k) {
      for (SpMat::InnerIterator it(s.h, k); it; ++it) {
        if (it.row() > it.col()) base.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (int k = 0; k < s.a.outerSize(); ++k) {
      for (SpMat::InnerIterator it(s.a, k); it; ++it) base.emplace_back(n + it.row(), it.col(), it.value());
    }
  }
};

MonolithicBackend::MonolithicBackend(const StandardQP& sqp) : impl_(std::make_unique<Impl>(sqp)) {}
MonolithicBackend::~MonolithicBackend() = default;

bool MonolithicBackend::factor(const Eigen::VectorXd& sigma, double reg) {
  const StandardQP& s = impl_->sqp;
  const int n = s.cols();
  const int m = s.rows();
  std::vector<Eigen::Triplet<double>> trip = impl_->base;
  const Eigen::VectorXd hdiag = s.h.diagonal();
  for (int j = 0; j < n; ++j) trip.emplace_back(j, j, hdiag[j] + sigma[j] + reg);
  for (int i = 0; i < m; ++i) trip.emplace_back(n + i, n + i, -reg);
  SpMat k(n + m, n + m);
  k.setFromTriplets(trip.begin(), trip.end());
  if (!impl_->analyzed) {
    impl_->ldlt.analyzePattern(k);
    impl_->analyzed = true;
  }
  impl_->ldlt.factorize(k);
  if (impl_->ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = impl_->ldlt.vectorD();
  if (!d.allFinite()) return false;
  const auto positive = (d.array() > 0).count();
  const auto negative = (d.array() < 0).count();
  return positive == n && negative == m;
}

Eigen::VectorXd MonolithicBackend::solve(const Eigen::VectorXd& rhs) { return impl_->ldlt.solve(rhs); }

Iterate initial_iterate(const StandardQP& s) {
  const int n = s.cols();
  Iterate it;
  it.x = s.start;
  it.y = Eigen::VectorXd::Zero(s.rows());
  it.z_lower = Eigen::VectorXd::Zero(n);
  it.z_upper = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const bool has_l = std::isfinite(s.lower[j]);
    const bool has_u = std::isfinite(s.upper[j]);
    const double width = s.upper[j] - s.lower[j];
    if (has_l) {
      double push = kBoundPush * std::max(1.0, std::abs(s.lower[j]));
      if (has_u) push = std::min(push, kBoundFrac * width);
      it.x[j] = std::max(it.x[j], s.lower[j] + push);
      it.z_lower[j] = 1.0;
    }
    if (has_u) {
      double push = kBoundPush * std::max(1.0, std::abs(s.upper[j]));
      if (has_l) push = std::min(push, kBoundFrac * width);
      it.x[j] = std::min(it.x[j], s.upper[j] - push);
      it.z_upper[j] = 1.0;
    }
  }
  return it;
}

Solution run(std::shared_ptr<const FlatQP> qp, const StandardQP& s, KktBackend& backend, const SolverOptions& opts) {
  if (!(opts.tol > 0) || !(opts.fraction_to_boundary > 0 && opts.fraction_to_boundary < 1)) {
    throw ParameterError("solver options need tol > 0 and 0 < fraction_to_boundary < 1");
  }
  const int n = s.cols();
  const int m = s.rows();
  std::vector<char> has_l(n), has_u(n);
  int num_bounds = 0;
  for (int j = 0; j < n; ++j) {
    has_l[j] = std::isfinite(s.lower[j]);
    has_u[j] = std::isfinite(s.upper[j]);
    num_bounds += has_l[j] + has_u[j];
  }

  Iterate start = initial_iterate(s);
  Eigen::VectorXd& x = start.x;
  Eigen::VectorXd& y = start.y;
  Eigen::VectorXd& zl = start.z_lower;
  Eigen::VectorXd& zu = start.z_upper;

  const SpMat at = s.a.transpose();
  Eigen::VectorXd gl(n), gu(n), sigma(n);
  auto gaps = [&]() {
    for (int j = 0; j < n; ++j) {
      gl[j] = has_l[j] ? x[j] - s.lower[j] : 1.0;
      gu[j] = has_u[j] ? s.upper[j] - x[j] : 1.0;
    }
  };
  // Unregularized Newton matrix times v, used for iterative refinement.
  auto apply = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(n + m);
    const auto vx = v.head(n);
    const auto vy = v.tail(m);
    out.head(n) = s.h * vx + sigma.cwiseProduct(vx) + at * vy;
    out.tail(m) = s.a * vx;
    return out;
  };
  double reg = opts.regularization;
  Solution sol;
  sol.qp = qp;
  std::vector<double> primal_history;
  SolveStatus status = SolveStatus::kIterationLimit;

  // Records the final relative residual against the unregularized matrix.
  auto solve_refined = [&](const Eigen::VectorXd& rhs) {
    Eigen::VectorXd v = backend.solve(rhs);
    double res_norm = inf_norm(rhs - apply(v));
    const double scale = 1.0 + inf_norm(rhs);
    for (int k = 0; k < kRefineSteps && res_norm > 1e-14 * scale; ++k) {
      Eigen::VectorXd cand = v + backend.solve(rhs - apply(v));
      const double cand_norm = inf_norm(rhs - apply(cand));
      if (!(cand_norm < res_norm)) break;
      v = std::move(cand);
      res_norm = cand_norm;
    }
    sol.step_residuals.push_back(res_norm / scale);
    return v;
  };

  int iter = 0;
  for (;; ++iter) {
    gaps();
    const Eigen::VectorXd r_d = s.h * x + s.c + at * y - zl + zu;
    const Eigen::VectorXd r_p = s.a * x - s.b;
    double comp = 0.0;
    double mu = 0.0;
    for (int j = 0; j < n; ++j) {
      if (has_l[j]) {
        comp = std::max(comp, gl[j] * zl[j]);
        mu += gl[j] * zl[j];
      }
      if (has_u[j]) {
        comp = std::max(comp, gu[j] * zu[j]);
        mu += gu[j] * zu[j];
      }
    }
    if (num_bounds > 0) mu /= num_bounds;
    const double rd = inf_norm(r_d);
    const double rp = inf_norm(r_p);
    if (!std::isfinite(rd) || !std::isfinite(rp) || !std::isfinite(mu)) {
      status = !primal_history.empty() && primal_history.back() > 0.9 * primal_history.front()
                   ? SolveStatus::kInfeasible
                   : SolveStatus::kNumericalError;
      break;
    }
    if (rd <= opts.tol && rp <= opts.tol && comp <= opts.tol) {
      status = SolveStatus::kOptimal;
      break;
    }
    if (iter >= opts.max_iter) {
      status = SolveStatus::kIterationLimit;
      break;
    }
    if (std::max({inf_norm(x), inf_norm(y), inf_norm(zl), inf_norm(zu), mu}) > kDivergence) {
      status = SolveStatus::kInfeasible;
      break;
    }
    primal_history.push_back(rp);
    if (iter >= kStallWindow && rp > 1e-6 && rp > 0.9 * primal_history[iter - kStallWindow]) {
      status = SolveStatus::kInfeasible;
      break;
    }

    for (int j = 0; j < n; ++j) {
      sigma[j] = (has_l[j] ? zl[j] / gl[j] : 0.0) + (has_u[j] ? zu[j] / gu[j] : 0.0);
    }
    Eigen::VectorXd rhs(n + m);
    Eigen::VectorXd tl(n), tu(n);
    Eigen::VectorXd dx, dy, dzl(n), dzu(n);
    auto newton = [&]() {
      for (int j = 0; j < n; ++j) {
        double v = -r_d[j];
        if (has_l[j]) v += tl[j] / gl[j] - zl[j];
        if (has_u[j]) v -= tu[j] / gu[j] - zu[j];
        rhs[j] = v;
      }
      rhs.tail(m) = -r_p;
      const Eigen::VectorXd step = solve_refined(rhs);
      dx = step.head(n);
      dy = step.tail(m);
      for (int j = 0; j < n; ++j) {
        dzl[j] = has_l[j] ? (tl[j] - gl[j] * zl[j] - zl[j] * dx[j]) / gl[j] : 0.0;
        dzu[j] = has_u[j] ? (tu[j] - gu[j] * zu[j] + zu[j] * dx[j]) / gu[j] : 0.0;
      }
    };
    auto primal_step = [&](double frac) {
      return std::min(max_step(gl, dx, has_l, frac), max_step(gu, -dx, has_u, frac));
    };
    auto dual_step = [&](double frac) {
      return std::min(max_step(zl, dzl, has_l, frac), max_step(zu, dzu, has_u, frac));
    };
    // Predictor, then Mehrotra corrector on the same factorization.
    auto predictor_corrector = [&]() {
      tl.setZero();
      tu.setZero();
      newton();
      if (num_bounds == 0) return;
      const double ap = primal_step(1.0);
      const double ad = dual_step(1.0);
      double mu_aff = 0.0;
      for (int j = 0; j < n; ++j) {
        if (has_l[j]) mu_aff += (gl[j] + ap * dx[j]) * (zl[j] + ad * dzl[j]);
        if (has_u[j]) mu_aff += (gu[j] - ap * dx[j]) * (zu[j] + ad * dzu[j]);
      }
      mu_aff /= num_bounds;
      const double centering = std::clamp(std::pow(mu_aff / mu, 3), 0.05, 0.95);
      for (int j = 0; j < n; ++j) {
        if (has_l[j]) tl[j] = centering * mu - dx[j] * dzl[j];
        if (has_u[j]) tu[j] = centering * mu + dx[j] * dzu[j];
      }
      newton();
    };

    // A factorization can pass the inertia test and still be too unstable
    // for refinement to recover; such steps are redone with more
    // regularization.
    bool stepped = false;
    while (true) {
      if (backend.factor(sigma, reg)) {
        const std::size_t mark = sol.step_residuals.size();
        predictor_corrector();
        const bool accurate = std::all_of(sol.step_residuals.begin() + static_cast<std::ptrdiff_t>(mark),
                                          sol.step_residuals.end(), [](double r) { return r <= kStepAccuracy; });
        if (accurate) {
          stepped = true;
          break;
        }
        sol.step_residuals.resize(mark);
      }
      reg *= 10.0;
      if (reg > opts.max_regularization * (1.0 + 1e-12)) break;
    }
    if (!stepped) {
      // A breakdown while the primal residual has stalled is infeasibility.
      const double recent = primal_history[std::max(0, iter - 3)];
      status = rp > 1e-6 && rp > 0.9 * recent ? SolveStatus::kInfeasible : SolveStatus::kNumericalError;
      break;
    }
    const double frac = opts.fraction_to_boundary;
    const double alpha = std::min(primal_step(frac), dual_step(frac));
    x += alpha * dx;
    y += alpha * dy;
    zl += alpha * dzl;
    zu += alpha * dzu;
    reg = std::max(opts.regularization, reg / 10.0);
  }

  sol.status = status;
  sol.iterations = iter;
  const int nf = s.num_flat;
  sol.x = x.head(nf);
  sol.y_eq = y.head(s.num_eq);
  sol.y_in = y.segment(s.num_eq, s.num_in);
  sol.z_lower = zl.head(nf);
  sol.z_upper = zu.head(nf);
  for (std::size_t k = 0; k < s.fixed.size(); ++k) {
    const double lam = y[s.num_eq + s.num_in + static_cast<int>(k)];
    sol.z_lower[s.fixed[k]] += std::max(-lam, 0.0);
    sol.z_upper[s.fixed[k]] += std::max(lam, 0.0);
  }
  sol.objective = qp->objective(sol.x);
  sol.index_rows();
  return sol;
}

}  // namespace ipm

Solution solve_monolithic(std::shared_ptr<const FlatQP> qp, const SolverOptions& opts) {
  const ipm::StandardQP sqp = ipm::standardize(*qp);
  ipm::MonolithicBackend backend(sqp);
  Solution sol = ipm::run(qp, sqp, backend, opts);
  sol.step_residuals.clear();
  return sol;
}

Solution solve_monolithic(const FlatQP& qp, const SolverOptions& opts) {
  return solve_monolithic(std::make_shared<const FlatQP>(qp), opts);
}

}  // namespace optigraph
