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

// Solvers z*(y) for every problem kind. Each solver honours spec.sense: a
// minimize-sense spec is solved as the maximization of -y. Ties are broken
// toward lower indices everywhere, so results are deterministic.

#ifndef PNO_SOLVERS_HPP_
#define PNO_SOLVERS_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "pno/problem.hpp"

namespace pno {

Solution solve_knapsack(const ProblemSpec& spec, std::span<const double> y);
/// Fractional knapsack: greedy by value/weight ratio, at most one fractional
/// item.
Solution solve_knapsack_relaxed(const ProblemSpec& spec,
                                std::span<const double> y);
Solution solve_topk(const ProblemSpec& spec, std::span<const double> y);
/// Exact enumeration of every subset of size <= budget when websites <= 20,
/// greedy marginal gain otherwise.
Solution solve_budget_allocation(const ProblemSpec& spec,
                                 std::span<const double> y);
/// Hungarian algorithm; returns a permutation matrix.
Solution solve_matching(const ProblemSpec& spec, std::span<const double> y);

struct PortfolioOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
};
/// Projected gradient ascent over the simplex. Solution::residual holds the
/// final gradient-mapping norm; a warning is logged if it exceeds the
/// tolerance.
Solution solve_portfolio(const ProblemSpec& spec, std::span<const double> y,
                         const PortfolioOptions& options = {});
/// Multiple-choice knapsack by dynamic programming over half-unit budget
/// steps. Strategy costs must be multiples of 0.5.
Solution solve_advertising(const ProblemSpec& spec, std::span<const double> y);

/// Exhaustive enumeration. `max_dim` bounds the decision dimension (side for
/// matching, job count for scheduling); the defaults are 15 for subset
/// problems and 7 for permutations. Throws UnsupportedError past the limit
/// and for portfolio.
Solution brute_force(const ProblemSpec& spec, std::span<const double> y,
                     std::optional<std::size_t> max_dim = std::nullopt);

/// A solver living outside this process. It receives {"spec": ..., "y": [...]}
/// as JSON on standard input and must print {"z": [...], "objective": v}.
class ExternalProcessSolver {
 public:
  explicit ExternalProcessSolver(std::string command);
  const std::string& command() const { return command_; }
  /// Throws SolverError on a nonzero exit, malformed output, or an
  /// infeasible decision.
  Solution solve(const ProblemSpec& spec, std::span<const double> y) const;

 private:
  std::string command_;
};

struct SolverOptions {
  /// Use the continuous relaxation where one differs from the exact problem
  /// (knapsack).
  bool relaxed = false;
  /// Required for scheduling, optional override for every other kind.
  std::shared_ptr<const ExternalProcessSolver> external;
};

/// Dispatches on spec.kind. Solution::objective is f(z, y) under the given y.
Solution solve(const ProblemSpec& spec, std::span<const double> y,
               const SolverOptions& options = {});

}  // namespace pno

#endif  // PNO_SOLVERS_HPP_
