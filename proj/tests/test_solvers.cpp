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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pno/error.hpp"
#include "pno/log.hpp"
#include "pno/problem.hpp"
#include "pno/solvers.hpp"

namespace pno {
namespace {

using Vec = std::vector<double>;

Vec uniform_vec(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void expect_feasible(const ProblemSpec& spec, const Solution& s) {
  const FeasibilityReport r = check_feasible(spec, s.z);
  EXPECT_TRUE(r.feasible) << (r.violations.empty() ? "" : r.violations.front());
}

TEST(KnapsackTest, HandExample) {
  const ProblemSpec spec = make_knapsack({1, 2, 3}, 5);
  const Solution s = solve_knapsack(spec, Vec{6, 10, 12});
  EXPECT_EQ(s.z, (Vec{0, 1, 1}));
  EXPECT_DOUBLE_EQ(objective(spec, s.z, Vec{6, 10, 12}), 22.0);
}

TEST(KnapsackTest, LooseCapacityTakesEverything) {
  const ProblemSpec spec = make_knapsack({1, 2, 3}, 6);
  EXPECT_EQ(solve_knapsack(spec, Vec{1, 2, 3}).z, (Vec{1, 1, 1}));
}

TEST(KnapsackTest, NothingFitsGivesEmpty) {
  const ProblemSpec spec = make_knapsack({4, 5}, 3);
  EXPECT_EQ(solve_knapsack(spec, Vec{1, 2}).z, (Vec{0, 0}));
}

TEST(KnapsackTest, NegativeCapacityIsParameterError) {
  const ProblemSpec spec = make_knapsack({1, 2}, -1);
  EXPECT_THROW(solve_knapsack(spec, Vec{1, 2}), ParameterError);
  EXPECT_THROW(solve_knapsack_relaxed(spec, Vec{1, 2}), ParameterError);
}

TEST(KnapsackTest, IntegerAndRealWeightsMatchBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> size(1, 15), w(3, 8);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = size(rng);
    Vec weights(n);
    for (double& x : weights) x = t % 2 ? w(rng) : uniform_vec(1, 0.5, 8.0, rng)[0];
    const ProblemSpec spec = make_knapsack(weights, 0.35 * n * 5.5);
    const Vec y = uniform_vec(n, 0.0, 10.0, rng);
    const Solution s = solve_knapsack(spec, y);
    expect_feasible(spec, s);
    EXPECT_NEAR(objective(spec, s.z, y), objective(spec, brute_force(spec, y).z, y), 1e-9);
  }
}

TEST(KnapsackRelaxedTest, HandExample) {
  const ProblemSpec spec = make_knapsack({1, 2, 3}, 5);
  const Solution s = solve_knapsack_relaxed(spec, Vec{6, 10, 12});
  ASSERT_EQ(s.z.size(), 3u);
  EXPECT_DOUBLE_EQ(s.z[0], 1.0);
  EXPECT_DOUBLE_EQ(s.z[1], 1.0);
  EXPECT_NEAR(s.z[2], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(objective_unchecked(spec, s.z, Vec{6, 10, 12}), 24.0, 1e-12);
}

TEST(KnapsackRelaxedTest, EdgeCases) {
  EXPECT_EQ(solve_knapsack_relaxed(make_knapsack({1, 2}, 0), Vec{3, 4}).z, (Vec{0, 0}));
  const Solution s = solve_knapsack_relaxed(make_knapsack({4}, 1), Vec{5});
  EXPECT_DOUBLE_EQ(s.z[0], 0.25);
}

TEST(KnapsackRelaxedTest, BoundsIntegerOptimumWithOneFraction) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 500; ++t) {
    const ProblemSpec spec = make_knapsack(uniform_vec(12, 1.0, 8.0, rng), 20.0);
    const Vec y = uniform_vec(12, 0.0, 5.0, rng);
    const Solution r = solve_knapsack_relaxed(spec, y);
    EXPECT_TRUE(check_feasible(spec, r.z, Domain::kRelaxed).feasible);
    EXPECT_EQ(std::count_if(r.z.begin(), r.z.end(), [](double v) { return v > 0 && v < 1; }) <= 1,
              true);
    EXPECT_GE(objective_unchecked(spec, r.z, y) + 1e-12,
              objective(spec, solve_knapsack(spec, y).z, y));
  }
}

TEST(TopKTest, Examples) {
  EXPECT_EQ(solve_topk(make_topk(3, 2), Vec{3, 1, 2}).z, (Vec{1, 0, 1}));
  EXPECT_EQ(solve_topk(make_topk(3, 1), Vec{1, 1, 0}).z, (Vec{1, 0, 0}));
  EXPECT_EQ(solve_topk(make_topk(3, 0), Vec{1, 2, 3}).z, (Vec{0, 0, 0}));
}

TEST(TopKTest, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const ProblemSpec spec = make_topk(10, 1 + t % 5);
    const Vec y = uniform_vec(10, -1.0, 1.0, rng);
    EXPECT_EQ(solve_topk(spec, y).z, brute_force(spec, y).z);
  }
}

TEST(BudgetAllocationTest, SingleSelectionPicksBestRow) {
  const ProblemSpec spec = make_budget_allocation(3, 2, 1);
  // Mean reach per website: 0.15, 0.5, 0.4.
  const Vec y = {0.1, 0.2, 0.9, 0.1, 0.4, 0.4};
  EXPECT_EQ(solve_budget_allocation(spec, y).z, (Vec{0, 1, 0}));
}

TEST(BudgetAllocationTest, ZeroReachGivesEmptySet) {
  const ProblemSpec spec = make_budget_allocation(4, 3, 2);
  const Solution s = solve_budget_allocation(spec, Vec(12, 0.0));
  EXPECT_EQ(s.z, Vec(4, 0.0));
}

TEST(BudgetAllocationTest, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> m(1, 10), n(1, 6);
  for (int t = 0; t < 200; ++t) {
    const std::size_t websites = m(rng), users = n(rng);
    const ProblemSpec spec =
        make_budget_allocation(websites, users, 1 + t % std::min<std::size_t>(websites, 4));
    const Vec y = uniform_vec(websites * users, 0.0, 1.0, rng);
    const Solution s = solve_budget_allocation(spec, y);
    expect_feasible(spec, s);
    EXPECT_NEAR(objective(spec, s.z, y), objective(spec, brute_force(spec, y).z, y), 1e-12);
  }
}

TEST(BudgetAllocationTest, GreedyBranchWithinSubmodularBound) {
  // 24 websites take the greedy branch; pairs are enumerated here directly.
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const ProblemSpec spec = make_budget_allocation(24, 5, 2);
    const Vec y = uniform_vec(24 * 5, 0.0, 0.5, rng);
    double best = 0.0;
    for (std::size_t a = 0; a < 24; ++a) {
      for (std::size_t b = a + 1; b < 24; ++b) {
        Vec z(24, 0.0);
        z[a] = z[b] = 1.0;
        best = std::max(best, objective(spec, z, y));
      }
    }
    const Solution s = solve_budget_allocation(spec, y);
    expect_feasible(spec, s);
    EXPECT_GE(objective(spec, s.z, y), (1.0 - 1.0 / std::exp(1.0)) * best - 1e-12);
  }
}

TEST(MatchingTest, IdentityAndAllOnes) {
  Vec eye(16, 0.0), ones(16, 1.0);
  for (int i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
  const ProblemSpec spec = make_matching(4);
  EXPECT_EQ(solve_matching(spec, eye).z, eye);
  const Solution a = solve_matching(spec, ones), b = solve_matching(spec, ones);
  EXPECT_EQ(a.z, b.z);
  EXPECT_DOUBLE_EQ(objective(spec, a.z, ones), 4.0);
}

TEST(MatchingTest, NonSquareIsDimensionError) {
  EXPECT_THROW(solve_matching(make_matching(3), Vec(8, 1.0)), DimensionError);
}

TEST(MatchingTest, MatchesBruteForce) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> side(1, 7);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = side(rng);
    const ProblemSpec spec = make_matching(n, t % 3 ? Sense::kMaximize : Sense::kMinimize);
    const Vec y = uniform_vec(n * n, -1.0, 1.0, rng);
    const Solution s = solve_matching(spec, y);
    expect_feasible(spec, s);
    EXPECT_NEAR(objective(spec, s.z, y), objective(spec, brute_force(spec, y).z, y), 1e-12);
  }
}

TEST(AdvertisingTest, ZeroBudgetAssignsFreeStrategy) {
  const ProblemSpec spec = make_advertising(3, {0.0, 0.5, 1.0, 1.5}, 0.0);
  std::mt19937_64 rng(7);
  const Solution s = solve_advertising(spec, uniform_vec(12, 0.0, 1.0, rng));
  for (std::size_t u = 0; u < 3; ++u) {
    EXPECT_EQ(s.z[u * 4], 1.0);
    EXPECT_EQ(s.z[u * 4 + 1] + s.z[u * 4 + 2] + s.z[u * 4 + 3], 0.0);
  }
}

TEST(AdvertisingTest, AmpleBudgetTakesPerUserArgmax) {
  const ProblemSpec spec = make_advertising(3, {0.0, 0.5, 1.0, 1.5}, 4.5);
  std::mt19937_64 rng(8);
  const Vec y = uniform_vec(12, 0.0, 1.0, rng);
  const Solution s = solve_advertising(spec, y);
  for (std::size_t u = 0; u < 3; ++u) {
    const auto first = y.begin() + u * 4;
    const std::size_t best = std::max_element(first, first + 4) - first;
    EXPECT_EQ(s.z[u * 4 + best], 1.0);
  }
}

TEST(AdvertisingTest, NegativeBudgetIsParameterError) {
  const ProblemSpec spec = make_advertising(1, {0.0, 0.5}, -1.0);
  EXPECT_THROW(solve_advertising(spec, Vec{0.1, 0.2}), ParameterError);
}

TEST(AdvertisingTest, MatchesBruteForce) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> users(1, 3);
  std::uniform_int_distribution<int> halves(0, 9);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = users(rng);
    const ProblemSpec spec =
        make_advertising(n, {0.0, 0.5, 1.0, 1.5}, 0.5 * halves(rng));
    const Vec y = uniform_vec(n * 4, 0.0, 1.0, rng);
    const Solution s = solve_advertising(spec, y);
    expect_feasible(spec, s);
    EXPECT_NEAR(objective(spec, s.z, y), objective(spec, brute_force(spec, y).z, y), 1e-12);
  }
}

TEST(PortfolioTest, NoRiskPutsAllMassOnBest) {
  Tensor q(Shape{3, 3});
  for (std::size_t i = 0; i < 3; ++i) q.at(i, i) = 1.0;
  const Solution s = solve_portfolio(make_portfolio(q, 0.0), Vec{0.1, 0.5, 0.2});
  EXPECT_NEAR(s.z[1], 1.0, 1e-9);
}

TEST(PortfolioTest, ZeroReturnIsUniform) {
  Tensor q(Shape{4, 4});
  for (std::size_t i = 0; i < 4; ++i) q.at(i, i) = 1.0;
  const Solution s = solve_portfolio(make_portfolio(q), Vec(4, 0.0));
  for (double v : s.z) EXPECT_NEAR(v, 0.25, 1e-9);
}

TEST(PortfolioTest, MatchesSimplexGridSearch) {
  Tensor q(Shape{3, 3});
  for (std::size_t i = 0; i < 3; ++i) q.at(i, i) = 1.0;
  const ProblemSpec spec = make_portfolio(q, 0.1);
  const Vec y = {0.3, 0.2, 0.1};
  double best = -1e300;
  for (int a = 0; a <= 1000; ++a) {
    for (int b = 0; a + b <= 1000; ++b) {
      const Vec z = {a * 1e-3, b * 1e-3, (1000 - a - b) * 1e-3};
      best = std::max(best, objective_unchecked(spec, z, y));
    }
  }
  const Solution s = solve_portfolio(spec, y);
  expect_feasible(spec, s);
  EXPECT_NEAR(objective(spec, s.z, y), best, 1e-3);
  EXPECT_GE(objective(spec, s.z, y), best - 1e-12);
  ASSERT_TRUE(s.residual.has_value());
  EXPECT_LT(*s.residual, 1e-8);
}

TEST(PortfolioTest, NonPsdIsParameterError) {
  Tensor q(Shape{2, 2});
  q.at(0, 1) = q.at(1, 0) = 1.0;
  EXPECT_THROW(solve_portfolio(make_portfolio(q), Vec{0.1, 0.2}), ParameterError);
}

TEST(PortfolioTest, IterationCapWarnsWithResidual) {
  std::vector<std::string> seen;
  set_warning_sink([&](const std::string& m) { seen.push_back(m); });
  Tensor q(Shape{3, 3});
  for (std::size_t i = 0; i < 3; ++i) q.at(i, i) = 1.0 + i;
  const Solution s = solve_portfolio(make_portfolio(q, 5.0), Vec{0.3, -0.2, 0.9}, {1e-30, 1});
  set_warning_sink(nullptr);
  ASSERT_FALSE(seen.empty());
  EXPECT_NE(seen.front().find("residual"), std::string::npos);
  ASSERT_TRUE(s.residual.has_value());
}

TEST(BruteForceTest, RefusesLargeDimensions) {
  EXPECT_THROW(brute_force(make_topk(20, 3), Vec(20, 1.0)), UnsupportedError);
  EXPECT_THROW(brute_force(make_matching(8), Vec(64, 1.0)), UnsupportedError);
}

TEST(SolverPropertyTest, BilinearOutputInvariantUnderPositiveScaling) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> alpha(0.01, 100.0);
  for (int t = 0; t < 100; ++t) {
    const std::vector<ProblemSpec> specs = {
        make_knapsack(uniform_vec(10, 1.0, 5.0, rng), 12.0), make_topk(10, 3), make_matching(4),
        make_advertising(3, {0.0, 0.5, 1.0, 1.5}, 1.5)};
    for (const ProblemSpec& spec : specs) {
      const Vec y = uniform_vec(spec.coefficient_size(), 0.0, 1.0, rng);
      const double a = alpha(rng);
      Vec scaled = y;
      for (double& v : scaled) v *= a;
      EXPECT_EQ(solve(spec, y).z, solve(spec, scaled).z) << to_string(spec.kind);
    }
  }
}

TEST(SolverPropertyTest, EveryOutputFeasible) {
  std::mt19937_64 rng(11);
  Tensor q(Shape{5, 5});
  for (std::size_t i = 0; i < 5; ++i) q.at(i, i) = 0.5 + 0.1 * i;
  const std::vector<ProblemSpec> specs = {
      make_knapsack(uniform_vec(15, 1.0, 5.0, rng), 15.0),  make_topk(15, 4),
      make_budget_allocation(8, 5, 3),                      make_matching(5),
      make_advertising(6, {0.0, 0.5, 1.0, 1.5}, 2.5),      make_portfolio(q)};
  for (const ProblemSpec& spec : specs) {
    for (int t = 0; t < 1000; ++t) {
      const Vec y = uniform_vec(spec.coefficient_size(), 0.0, 1.0, rng);
      const Solution s = solve(spec, y);
      ASSERT_TRUE(check_feasible(spec, s.z).feasible) << to_string(spec.kind);
    }
  }
}

TEST(SolverDispatchTest, RelaxedOptionAndSchedulingRequirement) {
  const ProblemSpec spec = make_knapsack({1, 2, 3}, 5);
  SolverOptions relaxed;
  relaxed.relaxed = true;
  EXPECT_NEAR(solve(spec, Vec{6, 10, 12}, relaxed).z[2], 2.0 / 3.0, 1e-15);
  ProblemSpec sched;
  sched.kind = ProblemKind::kScheduling;
  sched.sense = Sense::kMinimize;
  sched.machines = 1;
  sched.timeslots = 4;
  sched.machine_capacity = Tensor(Shape{1, 1}, 1.0);
  sched.jobs = {Job{0, 4, 2, 1.0, {1.0}}};
  EXPECT_THROW(solve(sched, Vec(4, 1.0)), UnsupportedError);
}

TEST(ExternalSolverTest, FailuresAreSolverErrors) {
  const ProblemSpec spec = make_topk(3, 1);
  EXPECT_THROW(ExternalProcessSolver("exit 3").solve(spec, Vec{1, 2, 3}), SolverError);
  EXPECT_THROW(ExternalProcessSolver("echo not-json").solve(spec, Vec{1, 2, 3}), SolverError);
  EXPECT_THROW(ExternalProcessSolver("echo '{\"z\":[1,1,1]}'").solve(spec, Vec{1, 2, 3}),
               SolverError);
  EXPECT_THROW(ExternalProcessSolver(""), ParameterError);
}

TEST(ExternalSolverTest, ToySchedulingSolverMatchesBruteForce) {
  ProblemSpec sched;
  sched.kind = ProblemKind::kScheduling;
  sched.sense = Sense::kMinimize;
  sched.machines = 2;
  sched.resources = 1;
  sched.timeslots = 6;
  sched.machine_capacity = Tensor(Shape{2, 1}, 1.0);
  sched.jobs = {Job{0, 6, 2, 1.0, {1.0}}, Job{1, 5, 3, 2.0, {1.0}}};
  const Vec y = {5, 1, 2, 4, 0.5, 3};
  const ExternalProcessSolver ext(PNO_TOY_SOLVER);
  const Solution s = ext.solve(sched, y);
  expect_feasible(sched, s);
  EXPECT_NEAR(objective(sched, s.z, y), objective(sched, brute_force(sched, y).z, y), 1e-12);
  SolverOptions opts;
  opts.external = std::make_shared<ExternalProcessSolver>(PNO_TOY_SOLVER);
  EXPECT_EQ(solve(sched, y, opts).z, s.z);
}

}  // namespace
}  // namespace pno
