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

// Seeded synthetic data generators. Every generator is a pure function of its
// parameter struct, and records those parameters in Dataset::provenance.

#ifndef PNO_GENERATORS_HPP_
#define PNO_GENERATORS_HPP_

#include <cstdint>
#include <optional>

#include "pno/problem.hpp"

namespace pno {

struct KnapsackGenParams {
  std::size_t n_items = 20;
  std::size_t n_features = 5;
  int degree = 4;
  std::size_t n_train = 400;
  std::size_t n_test = 200;
  double noise_half_width = 0.25;
  double capacity = 30.0;
  std::uint64_t seed = 0;
};

/// Polynomial knapsack data: x ~ N(0, I_p) per instance, one Bernoulli(0.5)
/// item-by-feature matrix B per dataset, item values
///   y = [((B x) + 3)^deg / (3.5^deg sqrt(p)) + 1] * eps,
/// eps ~ U[1 - h, 1 + h], integer weights uniform in [3, 8].
Dataset generate_knapsack_gen(const KnapsackGenParams& params);

/// Value of one knapsack-gen coefficient for a given projection (B x)_j and
/// noise factor.
double knapsack_gen_value(double projection, std::size_t n_features,
                          int degree, double noise);

struct CubicTopKParams {
  std::size_t n_items = 50;
  std::size_t k = 5;
  std::size_t n_train = 250;
  std::size_t n_test = 400;
  std::uint64_t seed = 0;
};

/// x ~ U[0,1) per item, y = 10 x^3 - 6.5 x; one feature row per item.
Dataset generate_cubic_topk(const CubicTopKParams& params);
double cubic_value(double x);

struct AdvertisingParams {
  std::size_t n_users = 200;
  std::size_t channels = 2;
  std::size_t n_features = 8;
  std::size_t n_train = 23;
  std::size_t n_test = 6;
  double per_capita_budget = 0.1;
  std::uint64_t seed = 0;
};

/// Channel c costs 0.5 * (c + 1); a strategy is a subset of channels (bit c
/// of the strategy index) and costs the sum of its channels.
std::vector<double> advertising_strategy_costs(std::size_t channels);

/// Users with N(0, I) features, a hidden seeded logistic conversion model
/// y_ij = sigmoid(a.x_i + b_j + u_j.x_i + c), and a uniformly random logged
/// strategy with a Bernoulli(y_ij) conversion flag per user. Predictor rows
/// are [x_i, onehot(j)], one per (user, strategy) pair.
Dataset generate_advertising_synthetic(const AdvertisingParams& params);

struct BudgetAllocationParams {
  std::size_t websites = 5;
  std::size_t users = 10;
  std::size_t budget = 1;
  std::size_t n_train = 400;
  std::size_t n_test = 200;
  std::uint64_t seed = 0;
};

/// Reach probabilities y_wu = u^3, u ~ U[0,1); features x_w = A y_w for one
/// random Gaussian A (users x users) per dataset.
Dataset generate_budget_allocation(const BudgetAllocationParams& params);

struct MatchingParams {
  std::size_t side = 6;
  std::size_t node_features = 4;
  std::size_t n_train = 40;
  std::size_t n_test = 10;
  std::uint64_t seed = 0;
};

/// Bipartite graphs with node features and edges drawn from a hidden bilinear
/// logistic model; predictor rows are [x_i, x_j] per pair.
Dataset generate_matching_synthetic(const MatchingParams& params);

struct PortfolioParams {
  std::size_t assets = 10;
  std::size_t n_features = 5;
  std::size_t factors = 3;
  std::size_t n_train = 200;
  std::size_t n_test = 100;
  double risk_aversion = 0.1;
  std::uint64_t seed = 0;
};

/// Factor-model covariance Q = L L^T + 0.01 I and returns driven by the same
/// per-asset feature rows through a hidden nonlinear map.
Dataset generate_portfolio_synthetic(const PortfolioParams& params);

}  // namespace pno

#endif  // PNO_GENERATORS_HPP_
