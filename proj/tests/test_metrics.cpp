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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pno/error.hpp"
#include "pno/metrics.hpp"
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

// A one-weight linear model: y_hat = x.
MlpModel passthrough() {
  MlpModel m({1, 1}, OutputHead::kIdentity, 0);
  m.parameters()[0][0] = 1.0;
  m.parameters()[1][0] = 0.0;
  return m;
}

Instance instance_with(const Vec& x, const Vec& y) {
  Instance inst;
  inst.x = Tensor(Shape{x.size(), 1}, x);
  inst.y = Tensor(Shape{y.size()}, y);
  return inst;
}

TEST(DecisionQualityTest, Examples) {
  const ProblemSpec spec = make_knapsack({1, 2, 3}, 5);
  EXPECT_DOUBLE_EQ(decision_quality(spec, Vec{1, 1, 0}, Vec{6, 10, 12}), 16.0);
  EXPECT_EQ(decision_quality(spec, Vec{0, 0, 0}, Vec{6, 10, 12}), 0.0);
  EXPECT_DOUBLE_EQ(decision_quality(spec, solve(spec, Vec{6, 10, 12}).z, Vec{6, 10, 12}), 22.0);
  EXPECT_THROW(decision_quality(spec, Vec{1, 1, 1}, Vec{6, 10, 12}), FeasibilityError);
}

TEST(DecisionQualityTest, OptimumDominatesEveryFeasibleDecision) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const ProblemSpec spec = make_knapsack(uniform_vec(6, 1.0, 4.0, rng), 6.0);
    const Vec y = uniform_vec(6, 0.0, 1.0, rng);
    const double best = decision_quality(spec, brute_force(spec, y).z, y);
    for (int mask = 0; mask < 64; ++mask) {
      Vec z(6);
      for (int i = 0; i < 6; ++i) z[i] = (mask >> i) & 1;
      if (!check_feasible(spec, z).feasible) continue;
      EXPECT_GE(best + 1e-12, decision_quality(spec, z, y));
    }
  }
}

TEST(RegretTest, Examples) {
  const ProblemSpec spec = make_knapsack({1, 2, 3}, 5);
  const Vec y = {6, 10, 12};
  EXPECT_DOUBLE_EQ(regret(spec, Vec{12, 10, 6}, y), 6.0);
  EXPECT_EQ(regret(spec, y, y), 0.0);
  EXPECT_EQ(regret(spec, Vec{18, 30, 36}, y), 0.0);
}

TEST(RegretTest, ZeroAtTruthForEveryKind) {
  std::mt19937_64 rng(2);
  Tensor q(Shape{3, 3});
  for (std::size_t i = 0; i < 3; ++i) q.at(i, i) = 1.0;
  const std::vector<ProblemSpec> specs = {
      make_knapsack({2, 3, 1, 4}, 5),     make_topk(5, 2),
      make_budget_allocation(4, 3, 2),    make_matching(3),
      make_portfolio(q),                  make_advertising(3, {0.0, 0.5, 1.0, 1.5}, 1.0)};
  for (const ProblemSpec& spec : specs) {
    for (int t = 0; t < 100; ++t) {
      const Vec y = uniform_vec(spec.coefficient_size(), 0.0, 1.0, rng);
      EXPECT_EQ(regret(spec, y, y), 0.0) << to_string(spec.kind);
    }
  }
}

TEST(RegretTest, NonNegativeAndZeroOnSameSolution) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const ProblemSpec spec = make_matching(3, t % 2 ? Sense::kMinimize : Sense::kMaximize);
    const Vec y = uniform_vec(9, -1, 1, rng), y_hat = uniform_vec(9, -1, 1, rng);
    const double r = regret(spec, y_hat, y);
    EXPECT_GE(r, 0.0);
    if (solve(spec, y_hat).z == solve(spec, y).z) EXPECT_EQ(r, 0.0);
  }
}

TEST(RelativeRegretTest, Examples) {
  EXPECT_NEAR(relative_regret(Vec{6.0}, Vec{22.0}), 600.0 / 22.0, 1e-12);
  EXPECT_NEAR(relative_regret(Vec{6.0, 6.0, 6.0}, Vec{22.0, 22.0, 22.0}), 600.0 / 22.0, 1e-12);
  EXPECT_THROW(relative_regret(Vec{1.0}, Vec{0.0}), UndefinedMetricError);
  EXPECT_THROW(relative_regret(Vec{}, Vec{}), UndefinedMetricError);
}

TEST(RelativeRegretTest, PerfectPredictorIsZero) {
  std::mt19937_64 rng(4);
  const ProblemSpec spec = make_topk(6, 2);
  std::vector<Instance> test;
  for (int i = 0; i < 10; ++i) {
    const Vec y = uniform_vec(6, 0.1, 1.0, rng);
    test.push_back(instance_with(y, y));
  }
  EXPECT_EQ(relative_regret(spec, test, passthrough()), 0.0);
}

TEST(RelativeRegretTest, InvariantToPositiveRescaling) {
  std::mt19937_64 rng(5);
  const ProblemSpec spec = make_knapsack({1, 2, 3, 2, 1, 2}, 5);
  std::vector<Instance> base, scaled;
  const double alpha = 37.5;
  for (int i = 0; i < 20; ++i) {
    const Vec y = uniform_vec(6, 0.1, 1.0, rng), noise = uniform_vec(6, -0.3, 0.3, rng);
    Vec x(6), xs(6), ys(6);
    for (int j = 0; j < 6; ++j) {
      x[j] = y[j] + noise[j];
      xs[j] = alpha * x[j];
      ys[j] = alpha * y[j];
    }
    base.push_back(instance_with(x, y));
    scaled.push_back(instance_with(xs, ys));
  }
  const double a = relative_regret(spec, base, passthrough());
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(relative_regret(spec, scaled, passthrough()), a, 1e-9);
}

TEST(UpliftTest, ConversionRateDifference) {
  AdvertisingLog log;
  std::vector<int> assign;
  for (int i = 0; i < 20; ++i) {
    log.strategy.push_back(1);
    const bool treated = i < 10;
    assign.push_back(treated ? 1 : 2);
    log.converted.push_back(treated ? (i < 3) : (i == 15));
  }
  EXPECT_NEAR(uplift(assign, log), 0.2, 1e-15);
}

TEST(UpliftTest, EmptyGroupNamed) {
  AdvertisingLog log{{0, 1, 2}, {1, 0, 1}};
  try {
    uplift(std::vector<int>{0, 1, 2}, log);
    FAIL() << "expected UndefinedMetricError";
  } catch (const UndefinedMetricError& e) {
    EXPECT_NE(std::string(e.what()).find("control"), std::string::npos) << e.what();
  }
  try {
    uplift(std::vector<int>{1, 2, 3}, log);
    FAIL() << "expected UndefinedMetricError";
  } catch (const UndefinedMetricError& e) {
    EXPECT_NE(std::string(e.what()).find("treatment"), std::string::npos) << e.what();
  }
}

TEST(UpliftTest, RandomAssignmentsWithoutEffectNearZero) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> pick(0, 3);
  std::bernoulli_distribution convert(0.3);
  const std::size_t n = 20000;
  AdvertisingLog log;
  std::vector<int> assign(n);
  Vec probs(n * 4, 0.3);
  for (std::size_t i = 0; i < n; ++i) {
    log.strategy.push_back(pick(rng));
    log.converted.push_back(convert(rng));
    assign[i] = pick(rng);
  }
  // Standard error of the difference is about 0.0075 here.
  EXPECT_NEAR(uplift(assign, log), 0.0, 0.035);
  EXPECT_NEAR(expected_uplift(assign, log, probs, 4), 0.0, 1e-12);
}

TEST(UpliftTest, AssignmentsFromDecision) {
  const ProblemSpec spec = make_advertising(3, {0.0, 0.5, 1.0, 1.5}, 1.0);
  EXPECT_EQ(advertising_assignments(spec, Vec{0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0}),
            (std::vector<int>{1, 0, -1}));
}

TEST(MetricRecordTest, Json) {
  const MetricRecord r{"run", 3, "test", "relative_regret", 2.5};
  const auto j = r.to_json();
  EXPECT_EQ(j.at("run_id"), "run");
  EXPECT_EQ(j.at("epoch"), 3);
  EXPECT_EQ(j.at("value"), 2.5);
}

}  // namespace
}  // namespace pno
