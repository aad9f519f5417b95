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

// Dense convex quadratic programs
//   minimize 1/2 x'Px + q'x  subject to  l <= Ax <= u
// solved by ADMM followed by an equality-constrained polish on the detected
// active set, and differentiated through the KKT conditions of that set.

#ifndef PNO_QP_HPP_
#define PNO_QP_HPP_

#include <vector>

#include <Eigen/Dense>

namespace pno {

struct QpProblem {
  Eigen::MatrixXd P;  // symmetric positive definite
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd l;  // -infinity for one-sided rows
  Eigen::VectorXd u;  // +infinity for one-sided rows
};

struct QpOptions {
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  double eps_abs = 1e-9;
  double eps_rel = 1e-9;
  int max_iterations = 20000;
  bool polish = true;
};

enum class RowState { kInactive, kLower, kUpper, kEquality };

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd dual;  // KKT: Px + q + A'dual = 0
  std::vector<RowState> active;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool polished = false;
};

/// Throws DimensionError on inconsistent shapes and ParameterError if l > u.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

/// Given dL/dx at the solution, returns dL/dq with the active set frozen:
/// dL/dq = -Z (Z'PZ)^{-1} Z' dL/dx, Z spanning the null space of the active
/// rows. Falls back to -dL/dx with a warning if Z'PZ is singular.
Eigen::VectorXd qp_backward_q(const QpProblem& problem,
                              const QpSolution& solution,
                              const Eigen::VectorXd& grad_x);

}  // namespace pno

#endif  // PNO_QP_HPP_
