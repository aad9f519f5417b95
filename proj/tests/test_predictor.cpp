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
#include "pno/finite_difference.hpp"
#include "pno/predictor.hpp"

namespace pno {
namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor t(Shape{r, c});
  for (double& v : t.values()) v = n(rng);
  return t;
}

void zero_parameters(MlpModel& m) {
  for (Tensor& p : m.parameters()) {
    for (double& v : p.values()) v = 0.0;
  }
}

TEST(MlpTest, ZeroWeightsIdentityHeadPredictsZero) {
  MlpModel m({3, 4, 2}, OutputHead::kIdentity, 1);
  zero_parameters(m);
  std::mt19937_64 rng(0);
  const Tensor out = predict(m, random_matrix(5, 3, rng));
  EXPECT_EQ(out.shape(), (Shape{5, 2}));
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(MlpTest, ZeroWeightsSigmoidHeadPredictsHalf) {
  MlpModel m({3, 4, 1}, OutputHead::kSigmoid, 1);
  zero_parameters(m);
  std::mt19937_64 rng(0);
  const Tensor out = predict(m, random_matrix(4, 3, rng));
  for (double v : out.values()) EXPECT_EQ(v, 0.5);
}

TEST(MlpTest, SameSeedSameOutput) {
  std::mt19937_64 rng(5);
  const Tensor x = random_matrix(6, 4, rng);
  const MlpModel a({4, 32, 32, 3}, OutputHead::kIdentity, 42);
  const MlpModel b({4, 32, 32, 3}, OutputHead::kIdentity, 42);
  EXPECT_EQ(predict(a, x), predict(b, x));
  const MlpModel c({4, 32, 32, 3}, OutputHead::kIdentity, 43);
  EXPECT_NE(predict(a, x), predict(c, x));
}

TEST(MlpTest, WidthMismatchIsDimensionError) {
  const MlpModel m({3, 4, 1}, OutputHead::kIdentity, 1);
  EXPECT_THROW(predict(m, Tensor(Shape{2, 4}, 0.0)), DimensionError);
}

TEST(MlpTest, GlorotBounds) {
  const MlpModel m({5, 32, 20}, OutputHead::kIdentity, 9);
  const double bound0 = std::sqrt(6.0 / (5 + 32));
  for (double v : m.parameters()[0].values()) EXPECT_LE(std::abs(v), bound0);
  for (double v : m.parameters()[1].values()) EXPECT_EQ(v, 0.0);
}

TEST(MlpTest, JsonRoundTrip) {
  std::mt19937_64 rng(2);
  const MlpModel m({3, 8, 2}, OutputHead::kSigmoid, 7);
  const MlpModel back = MlpModel::from_json(m.to_json());
  const Tensor x = random_matrix(4, 3, rng);
  EXPECT_EQ(predict(m, x), predict(back, x));
  EXPECT_EQ(back.head(), OutputHead::kSigmoid);
}

TEST(MlpTest, GraphMatchesPredictAndFiniteDifferences) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    MlpModel m({4, 6, 5, 3}, trial % 2 ? OutputHead::kSigmoid : OutputHead::kIdentity,
               100 + trial);
    // Random biases so ReLU kinks are unlikely to sit at the probe point.
    for (std::size_t l = 1; l < m.parameters().size(); l += 2) {
      for (double& v : m.parameters()[l].values()) v = 0.3 * (rng() % 1000) / 1000.0;
    }
    const Tensor x = random_matrix(7, 4, rng);
    const Tensor y = random_matrix(7, 3, rng);
    Graph g;
    NodeId out = m.build(g, g.input("x"));
    pto_loss_node(g, out, g.constant(y), PtoLossKind::kMse);
    NamedTensors in = m.bind(x);
    g.forward(in);
    EXPECT_LT(max_relative_error(g.value(out), predict(m, x)), 1e-13);
    const NamedTensors grads = g.backward(Tensor::scalar(1.0));
    for (std::size_t p = 0; p < m.parameters().size(); ++p) {
      const std::string& name = m.parameter_names()[p];
      auto f = [&](const Tensor& w) {
        NamedTensors probe = in;
        probe.at(name) = w;
        return g.forward(probe).item();
      };
      const Tensor numeric = finite_difference_gradient(f, m.parameters()[p]);
      EXPECT_LT(max_relative_error(grads.at(name), numeric), 1e-4) << name;
    }
  }
}

TEST(PtoLossTest, MseExamples) {
  const Tensor y = Tensor::vector({1.0, -2.0});
  EXPECT_EQ(pto_loss(y, y, PtoLossKind::kMse), 0.0);
  EXPECT_DOUBLE_EQ(pto_loss(Tensor::vector({0.0, 2.0}), Tensor::vector({0.0, 0.0}),
                            PtoLossKind::kMse),
                   2.0);
}

TEST(PtoLossTest, BceAtHalf) {
  EXPECT_NEAR(pto_loss(Tensor::vector({0.5}), Tensor::vector({1.0}), PtoLossKind::kBce),
              std::log(2.0), 1e-15);
}

TEST(PtoLossTest, BceOutsideOpenIntervalIsNumericError) {
  EXPECT_THROW(pto_loss(Tensor::vector({1.0}), Tensor::vector({1.0}), PtoLossKind::kBce),
               NumericError);
  EXPECT_THROW(pto_loss(Tensor::vector({-0.1}), Tensor::vector({0.0}), PtoLossKind::kBce),
               NumericError);
}

TEST(PtoLossTest, ShapeMismatchIsDimensionError) {
  EXPECT_THROW(pto_loss(Tensor::vector({1.0}), Tensor::vector({1.0, 2.0}),
                        PtoLossKind::kMse),
               DimensionError);
}

TEST(PtoLossTest, NonNegativeAndZeroOnlyAtTarget) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int t = 0; t < 100; ++t) {
    Tensor a(Shape{5}), b(Shape{5});
    for (std::size_t i = 0; i < 5; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
    }
    EXPECT_GT(pto_loss(a, b, PtoLossKind::kMse), 0.0);
    EXPECT_GE(pto_loss(a, b, PtoLossKind::kBce), 0.0);
  }
}

TEST(PtoLossTest, GraphFormMatchesDirect) {
  const Tensor y_hat = Tensor::vector({0.2, 0.7, 0.9});
  const Tensor y = Tensor::vector({0.0, 1.0, 0.4});
  for (PtoLossKind k : {PtoLossKind::kMse, PtoLossKind::kBce}) {
    Graph g;
    pto_loss_node(g, g.input("p"), g.constant(y), k);
    EXPECT_NEAR(g.forward({{"p", y_hat}}).item(), pto_loss(y_hat, y, k), 1e-11);
  }
}

TEST(AdamTest, ZeroGradientLeavesParameters) {
  AdamState adam(0.1);
  std::vector<Tensor> params = {Tensor::vector({1.0, -3.0})};
  const std::vector<Tensor> grads = {Tensor::vector({0.0, 0.0})};
  for (int i = 0; i < 10; ++i) adam.step(params, grads);
  EXPECT_EQ(params[0].values(), (std::vector<double>{1.0, -3.0}));
  EXPECT_EQ(adam.step_count(), 10u);
}

TEST(AdamTest, QuadraticConverges) {
  AdamState adam(0.1);
  std::vector<Tensor> params = {Tensor::vector({1.0})};
  for (int i = 0; i < 500; ++i) {
    adam.step(params, {Tensor::vector({2.0 * params[0][0]})});
  }
  EXPECT_LT(std::abs(params[0][0]), 1e-3);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  AdamState adam(0.01);
  std::vector<Tensor> params = {Tensor::vector({0.0, 0.0})};
  adam.step(params, {Tensor::vector({5.0, -0.2})});
  EXPECT_NEAR(params[0][0], -0.01, 1e-9);
  EXPECT_NEAR(params[0][1], 0.01, 1e-9);
}

TEST(AdamTest, NanGradientNamesParameterAndKeepsValues) {
  AdamState adam(0.1);
  std::vector<Tensor> params = {Tensor::vector({1.0}), Tensor::vector({2.0})};
  const std::vector<Tensor> grads = {Tensor::vector({0.5}), Tensor::vector({std::nan("")})};
  try {
    adam.step(params, grads, {"W0", "b0"});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("b0"), std::string::npos);
  }
  EXPECT_EQ(params[0][0], 1.0);
  EXPECT_EQ(params[1][0], 2.0);
}

TEST(AdamTest, SameInputsSameTrajectory) {
  auto run = [] {
    AdamState adam(0.05);
    std::vector<Tensor> params = {Tensor::vector({0.3, -0.7})};
    for (int i = 0; i < 50; ++i) {
      Tensor g = params[0];
      for (double& v : g.values()) v = std::sin(3.0 * v);
      adam.step(params, {g});
    }
    return params[0];
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace pno
