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

#include "pno/generators.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "pno/error.hpp"

namespace pno {

namespace {

void require_positive(std::size_t v, const char* what) {
  if (v == 0) throw ParameterError(std::string(what) + " must be positive");
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

double knapsack_gen_value(double projection, std::size_t n_features,
                          int degree, double noise) {
  const double scale = std::pow(3.5, degree) * std::sqrt(static_cast<double>(n_features));
  return (std::pow(projection + 3.0, degree) / scale + 1.0) * noise;
}

Dataset generate_knapsack_gen(const KnapsackGenParams& p) {
  require_positive(p.n_items, "n_items");
  require_positive(p.n_features, "n_features");
  require_positive(p.n_train, "n_train");
  if (p.degree < 1) throw ParameterError("degree must be >= 1");
  if (p.noise_half_width < 0.0 || p.noise_half_width >= 1.0) {
    throw ParameterError("noise_half_width must be in [0, 1)");
  }
  if (p.capacity < 0.0) throw ParameterError("capacity must be >= 0");

  std::mt19937_64 rng(p.seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> noise(1.0 - p.noise_half_width,
                                               1.0 + p.noise_half_width);
  std::uniform_int_distribution<int> weight(3, 8);

  std::vector<double> b(p.n_items * p.n_features);
  for (double& v : b) v = coin(rng) ? 1.0 : 0.0;
  std::vector<double> weights(p.n_items);
  for (double& w : weights) w = weight(rng);

  Dataset d;
  d.spec = make_knapsack(weights, p.capacity);
  auto make = [&](std::size_t count, std::vector<Instance>& out) {
    for (std::size_t i = 0; i < count; ++i) {
      Instance inst;
      inst.x = Tensor(Shape{1, p.n_features});
      for (double& v : inst.x.values()) v = normal(rng);
      inst.y = Tensor(Shape{p.n_items});
      for (std::size_t j = 0; j < p.n_items; ++j) {
        double proj = 0.0;
        for (std::size_t f = 0; f < p.n_features; ++f) {
          proj += b[j * p.n_features + f] * inst.x[f];
        }
        const double eps = p.noise_half_width > 0.0 ? noise(rng) : 1.0;
        inst.y[j] = knapsack_gen_value(proj, p.n_features, p.degree, eps);
      }
      out.push_back(std::move(inst));
    }
  };
  make(p.n_train, d.train);
  make(p.n_test, d.test);
  d.provenance = {{"generator", "knapsack_gen"},
                  {"n_items", p.n_items},
                  {"n_features", p.n_features},
                  {"degree", p.degree},
                  {"n_train", p.n_train},
                  {"n_test", p.n_test},
                  {"noise_half_width", p.noise_half_width},
                  {"capacity", p.capacity},
                  {"seed", p.seed}};
  return d;
}

double cubic_value(double x) { return 10.0 * x * x * x - 6.5 * x; }

Dataset generate_cubic_topk(const CubicTopKParams& p) {
  require_positive(p.n_items, "n_items");
  require_positive(p.n_train, "n_train");
  if (p.k == 0 || p.k > p.n_items) {
    throw ParameterError("k must satisfy 0 < k <= n_items");
  }
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dataset d;
  d.spec = make_topk(p.n_items, p.k);
  auto make = [&](std::size_t count, std::vector<Instance>& out) {
    for (std::size_t i = 0; i < count; ++i) {
      Instance inst;
      inst.x = Tensor(Shape{p.n_items, 1});
      inst.y = Tensor(Shape{p.n_items});
      for (std::size_t j = 0; j < p.n_items; ++j) {
        inst.x[j] = unif(rng);
        inst.y[j] = cubic_value(inst.x[j]);
      }
      out.push_back(std::move(inst));
    }
  };
  make(p.n_train, d.train);
  make(p.n_test, d.test);
  d.provenance = {{"generator", "cubic_topk"}, {"n_items", p.n_items},
                  {"k", p.k},                  {"n_train", p.n_train},
                  {"n_test", p.n_test},        {"seed", p.seed}};
  return d;
}

std::vector<double> advertising_strategy_costs(std::size_t channels) {
  if (channels == 0 || channels > 16) {
    throw ParameterError("channels must be in [1, 16]");
  }
  const std::size_t S = std::size_t{1} << channels;
  std::vector<double> costs(S, 0.0);
  for (std::size_t j = 0; j < S; ++j) {
    for (std::size_t c = 0; c < channels; ++c) {
      if (j & (std::size_t{1} << c)) costs[j] += 0.5 * static_cast<double>(c + 1);
    }
  }
  return costs;
}

Dataset generate_advertising_synthetic(const AdvertisingParams& p) {
  require_positive(p.n_users, "n_users");
  require_positive(p.n_features, "n_features");
  require_positive(p.n_train, "n_train");
  const std::vector<double> costs = advertising_strategy_costs(p.channels);
  const std::size_t S = costs.size(), d = p.n_features;

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(S) - 1);

  // Hidden ground truth: base response, per-strategy lift and per-strategy
  // heterogeneous response to the user features.
  const double feat_scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> base(d);
  for (double& v : base) v = normal(rng) * feat_scale;
  std::vector<double> lift(S, 0.0);
  std::vector<double> hetero(S * d, 0.0);
  for (std::size_t j = 1; j < S; ++j) {
    lift[j] = 0.25 * static_cast<double>(std::popcount(j)) + 0.1 * normal(rng);
    for (std::size_t f = 0; f < d; ++f) hetero[j * d + f] = normal(rng) * feat_scale;
  }
  const double intercept = -1.0;

  Dataset ds;
  ds.spec = make_advertising(p.n_users, costs,
                             p.per_capita_budget * static_cast<double>(p.n_users));
  auto make = [&](std::size_t count, std::vector<Instance>& out) {
    for (std::size_t i = 0; i < count; ++i) {
      Instance inst;
      inst.x = Tensor(Shape{p.n_users * S, d + S});
      inst.y = Tensor(Shape{p.n_users * S});
      AdvertisingLog log;
      std::vector<double> feats(d);
      for (std::size_t u = 0; u < p.n_users; ++u) {
        for (double& v : feats) v = normal(rng);
        for (std::size_t j = 0; j < S; ++j) {
          const std::size_t row = u * S + j;
          double logit = intercept + lift[j];
          for (std::size_t f = 0; f < d; ++f) {
            logit += (base[f] + hetero[j * d + f]) * feats[f];
            inst.x.at(row, f) = feats[f];
          }
          inst.x.at(row, d + j) = 1.0;
          inst.y[row] = sigmoid(logit);
        }
        const int logged = pick(rng);
        log.strategy.push_back(logged);
        log.converted.push_back(unif(rng) < inst.y[u * S + logged] ? 1 : 0);
      }
      inst.log = std::move(log);
      out.push_back(std::move(inst));
    }
  };
  make(p.n_train, ds.train);
  make(p.n_test, ds.test);
  ds.provenance = {{"generator", "advertising_synthetic"},
                   {"n_users", p.n_users},
                   {"channels", p.channels},
                   {"n_features", p.n_features},
                   {"n_train", p.n_train},
                   {"n_test", p.n_test},
                   {"per_capita_budget", p.per_capita_budget},
                   {"seed", p.seed}};
  return ds;
}

Dataset generate_budget_allocation(const BudgetAllocationParams& p) {
  require_positive(p.websites, "websites");
  require_positive(p.users, "users");
  require_positive(p.n_train, "n_train");
  if (p.budget > p.websites) throw ParameterError("budget exceeds websites");
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t N = p.users, M = p.websites;
  std::vector<double> a(N * N);
  for (double& v : a) v = normal(rng);

  Dataset d;
  d.spec = make_budget_allocation(M, N, p.budget);
  auto make = [&](std::size_t count, std::vector<Instance>& out) {
    for (std::size_t i = 0; i < count; ++i) {
      Instance inst;
      inst.y = Tensor(Shape{M * N});
      inst.x = Tensor(Shape{M, N});
      for (double& v : inst.y.values()) {
        const double u = unif(rng);
        v = u * u * u;
      }
      for (std::size_t w = 0; w < M; ++w) {
        for (std::size_t r = 0; r < N; ++r) {
          double s = 0.0;
          for (std::size_t c = 0; c < N; ++c) s += a[r * N + c] * inst.y[w * N + c];
          inst.x.at(w, r) = s;
        }
      }
      out.push_back(std::move(inst));
    }
  };
  make(p.n_train, d.train);
  make(p.n_test, d.test);
  d.provenance = {{"generator", "budget_allocation"}, {"websites", M},
                  {"users", N}, {"budget", p.budget}, {"n_train", p.n_train},
                  {"n_test", p.n_test}, {"seed", p.seed}};
  return d;
}

Dataset generate_matching_synthetic(const MatchingParams& p) {
  require_positive(p.side, "side");
  require_positive(p.node_features, "node_features");
  require_positive(p.n_train, "n_train");
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t n = p.side, f = p.node_features;
  std::vector<double> w(f * f);
  for (double& v : w) v = normal(rng) / static_cast<double>(f);

  Dataset d;
  d.spec = make_matching(n);
  auto make = [&](std::size_t count, std::vector<Instance>& out) {
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> left(n * f), right(n * f);
      for (double& v : left) v = normal(rng);
      for (double& v : right) v = normal(rng);
      Instance inst;
      inst.x = Tensor(Shape{n * n, 2 * f});
      inst.y = Tensor(Shape{n * n});
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          const std::size_t row = a * n + b;
          double logit = -0.5;
          for (std::size_t r = 0; r < f; ++r) {
            for (std::size_t c = 0; c < f; ++c) {
              logit += left[a * f + r] * w[r * f + c] * right[b * f + c] * 3.0;
            }
            inst.x.at(row, r) = left[a * f + r];
            inst.x.at(row, f + r) = right[b * f + r];
          }
          inst.y[row] = unif(rng) < sigmoid(logit) ? 1.0 : 0.0;
        }
      }
      out.push_back(std::move(inst));
    }
  };
  make(p.n_train, d.train);
  make(p.n_test, d.test);
  d.provenance = {{"generator", "matching_synthetic"}, {"side", n},
                  {"node_features", f}, {"n_train", p.n_train},
                  {"n_test", p.n_test}, {"seed", p.seed}};
  return d;
}

Dataset generate_portfolio_synthetic(const PortfolioParams& p) {
  require_positive(p.assets, "assets");
  require_positive(p.n_features, "n_features");
  require_positive(p.n_train, "n_train");
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = p.assets, q = p.n_features;

  std::vector<double> loadings(n * p.factors);
  for (double& v : loadings) v = 0.1 * normal(rng);
  Tensor cov(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = i == j ? 0.01 : 0.0;
      for (std::size_t k = 0; k < p.factors; ++k) {
        s += loadings[i * p.factors + k] * loadings[j * p.factors + k];
      }
      cov.at(i, j) = s;
    }
  }
  std::vector<double> b1(q), b2(q);
  for (double& v : b1) v = normal(rng) / std::sqrt(static_cast<double>(q));
  for (double& v : b2) v = normal(rng) / std::sqrt(static_cast<double>(q));

  Dataset d;
  d.spec = make_portfolio(cov, p.risk_aversion);
  auto make = [&](std::size_t count, std::vector<Instance>& out) {
    for (std::size_t i = 0; i < count; ++i) {
      Instance inst;
      inst.x = Tensor(Shape{n, q});
      inst.y = Tensor(Shape{n});
      for (std::size_t a = 0; a < n; ++a) {
        double l1 = 0.0, l2 = 0.0;
        for (std::size_t f = 0; f < q; ++f) {
          const double v = normal(rng);
          inst.x.at(a, f) = v;
          l1 += b1[f] * v;
          l2 += b2[f] * v;
        }
        inst.y[a] = 0.05 * l1 + 0.02 * l2 * l2 + 0.01 * normal(rng);
      }
      out.push_back(std::move(inst));
    }
  };
  make(p.n_train, d.train);
  make(p.n_test, d.test);
  d.provenance = {{"generator", "portfolio_synthetic"}, {"assets", n},
                  {"n_features", q}, {"factors", p.factors},
                  {"n_train", p.n_train}, {"n_test", p.n_test},
                  {"risk_aversion", p.risk_aversion}, {"seed", p.seed}};
  return d;
}

}  // namespace pno
