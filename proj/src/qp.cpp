// Copyright 2026 The pnobench Authors
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

#include "pno/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pno/error.hpp"
#include "pno/log.hpp"

namespace pno {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Orthonormal basis of {x : rows x = 0}.
MatrixXd null_space(const MatrixXd& rows, std::size_t n) {
  if (rows.rows() == 0) return MatrixXd::Identity(n, n);
  Eigen::FullPivHouseholderQR<MatrixXd> qr(rows.transpose());
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  const MatrixXd Q = qr.matrixQ();
  return Q.rightCols(static_cast<Eigen::Index>(n) - rank);
}

struct ActiveRows {
  MatrixXd A;
  VectorXd b;
  std::vector<Eigen::Index> index;
};

ActiveRows gather(const QpProblem& p, const std::vector<RowState>& state) {
  ActiveRows act;
  for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
    if (state[i] != RowState::kInactive) act.index.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(act.index.size());
  act.A.resize(m, p.A.cols());
  act.b.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = act.index[k];
    act.A.row(k) = p.A.row(i);
    act.b(k) = state[i] == RowState::kUpper ? p.u(i) : p.l(i);
  }
  return act;
}

// Solves the equality-constrained problem on the guessed active set and
// accepts it only if it satisfies every KKT condition of the full problem.
bool polish(const QpProblem& p, const std::vector<RowState>& state,
            QpSolution& out) {
  const auto n = p.P.rows();
  const ActiveRows act = gather(p, state);
  VectorXd xp = VectorXd::Zero(n);
  if (act.A.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(act.A);
    xp = cod.solve(act.b);
    if (inf_norm(act.A * xp - act.b) > 1e-9 * std::max(1.0, inf_norm(act.b))) {
      return false;
    }
  }
  const MatrixXd Z = null_space(act.A, static_cast<std::size_t>(n));
  VectorXd x = xp;
  if (Z.cols() > 0) {
    const MatrixXd H = Z.transpose() * p.P * Z;
    Eigen::LLT<MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) return false;
    x += Z * llt.solve(-Z.transpose() * (p.P * xp + p.q));
  }
  const VectorXd stat = p.P * x + p.q;
  VectorXd nu = VectorXd::Zero(act.A.rows());
  if (act.A.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(act.A.transpose());
    nu = cod.solve(-stat);
  }
  const double scale = std::max({1.0, inf_norm(stat), inf_norm(p.q)});
  if (inf_norm(stat + act.A.transpose() * nu) > 1e-8 * scale) return false;

  const VectorXd ax = p.A * x;
  for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
    const double tol_l = 1e-9 * std::max(1.0, std::abs(p.l(i)));
    const double tol_u = 1e-9 * std::max(1.0, std::abs(p.u(i)));
    if (ax(i) < p.l(i) - tol_l || ax(i) > p.u(i) + tol_u) return false;
  }
  VectorXd dual = VectorXd::Zero(p.A.rows());
  for (Eigen::Index k = 0; k < act.A.rows(); ++k) {
    const Eigen::Index i = act.index[k];
    const double tol = 1e-9 * scale;
    if (state[i] == RowState::kLower && nu(k) > tol) return false;
    if (state[i] == RowState::kUpper && nu(k) < -tol) return false;
    dual(i) = nu(k);
  }
  out.x = x;
  out.dual = dual;
  out.active = state;
  out.polished = true;
  out.primal_residual = 0.0;
  out.dual_residual = inf_norm(stat + p.A.transpose() * dual);
  return true;
}

std::vector<RowState> guess_active(const QpProblem& p, const VectorXd& z,
                                   const VectorXd& y) {
  std::vector<RowState> state(p.A.rows(), RowState::kInactive);
  for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
    if (p.u(i) - p.l(i) < 1e-12) {
      state[i] = RowState::kEquality;
    } else if (std::isfinite(p.l(i)) && z(i) - p.l(i) < -y(i)) {
      state[i] = RowState::kLower;
    } else if (std::isfinite(p.u(i)) && p.u(i) - z(i) < y(i)) {
      state[i] = RowState::kUpper;
    }
  }
  return state;
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, const QpOptions& opt) {
  const Eigen::Index n = p.P.rows(), m = p.A.rows();
  if (p.P.cols() != n || p.q.size() != n || (m > 0 && p.A.cols() != n) ||
      p.l.size() != m || p.u.size() != m) {
    throw DimensionError("solve_qp: inconsistent problem dimensions");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (p.l(i) > p.u(i)) {
      throw ParameterError("solve_qp: lower bound exceeds upper bound in row " +
                           std::to_string(i));
    }
  }

  VectorXd rho(m);
  double rho_base = opt.rho;
  auto set_rho = [&]() {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (p.u(i) - p.l(i) < 1e-12) {
        rho(i) = 1e3 * rho_base;
      } else if (!std::isfinite(p.l(i)) && !std::isfinite(p.u(i))) {
        rho(i) = 1e-6;
      } else {
        rho(i) = rho_base;
      }
    }
  };
  set_rho();
  const MatrixXd I = MatrixXd::Identity(n, n);
  auto factor = [&]() {
    return Eigen::LLT<MatrixXd>(p.P + opt.sigma * I +
                                p.A.transpose() * rho.asDiagonal() * p.A);
  };
  Eigen::LLT<MatrixXd> llt = factor();

  VectorXd x = VectorXd::Zero(n);
  VectorXd z = (p.A * x).cwiseMax(p.l).cwiseMin(p.u);
  VectorXd y = VectorXd::Zero(m);
  QpSolution sol;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    const VectorXd xt =
        llt.solve(opt.sigma * x - p.q + p.A.transpose() * (rho.cwiseProduct(z) - y));
    const VectorXd zt = p.A * xt;
    x = opt.alpha * xt + (1.0 - opt.alpha) * x;
    const VectorXd zr = opt.alpha * zt + (1.0 - opt.alpha) * z;
    const VectorXd znew =
        (zr + y.cwiseQuotient(rho)).cwiseMax(p.l).cwiseMin(p.u);
    y += rho.cwiseProduct(zr - znew);
    z = znew;
    sol.iterations = k;

    if (k % 10 != 0 && k != opt.max_iterations) continue;
    const VectorXd ax = p.A * x, px = p.P * x, aty = p.A.transpose() * y;
    const double rp = inf_norm(ax - z);
    const double rd = inf_norm(px + p.q + aty);
    sol.primal_residual = rp;
    sol.dual_residual = rd;
    if (opt.polish && k % 50 == 0) {
      if (polish(p, guess_active(p, z, y), sol)) {
        sol.iterations = k;
        return sol;
      }
    }
    const double sp = std::max(inf_norm(ax), inf_norm(z));
    const double sd = std::max({inf_norm(px), inf_norm(aty), inf_norm(p.q)});
    if (rp <= opt.eps_abs + opt.eps_rel * sp &&
        rd <= opt.eps_abs + opt.eps_rel * sd) {
      break;
    }
    if (k % 50 == 0 && m > 0) {
      const double ratio = std::sqrt((rp / std::max(sp, 1e-12)) /
                                     std::max(rd / std::max(sd, 1e-12), 1e-30));
      // The narrow clamp keeps a vanishing primal residual (typical at a
      // vertex) from driving rho so low that the iteration stalls.
      if (ratio > 5.0 || ratio < 0.2) {
        rho_base = std::clamp(rho_base * ratio, 1e-3, 1e3);
        set_rho();
        llt = factor();
      }
    }
  }
  sol.x = x;
  sol.dual = y;
  sol.active = guess_active(p, z, y);
  if (opt.polish && polish(p, sol.active, sol)) return sol;
  if (sol.primal_residual > 1e-6 || sol.dual_residual > 1e-6) {
    warn("solve_qp: stopped after " + std::to_string(sol.iterations) +
         " iterations with residuals " + std::to_string(sol.primal_residual) +
         " / " + std::to_string(sol.dual_residual));
  }
  return sol;
}

VectorXd qp_backward_q(const QpProblem& p, const QpSolution& sol,
                       const VectorXd& grad_x) {
  const auto n = p.P.rows();
  if (grad_x.size() != n) {
    throw DimensionError("qp_backward_q: gradient has the wrong length");
  }
  const ActiveRows act = gather(p, sol.active);
  const MatrixXd Z = null_space(act.A, static_cast<std::size_t>(n));
  if (Z.cols() == 0) return VectorXd::Zero(n);
  const MatrixXd H = Z.transpose() * p.P * Z;
  Eigen::LLT<MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    warn("qp_backward_q: singular reduced KKT system, using -dL/dx");
    return -grad_x;
  }
  return -(Z * llt.solve(Z.transpose() * grad_x));
}

}  // namespace pno
