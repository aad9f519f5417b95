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

// Decision-quality metrics.

#ifndef PNO_METRICS_HPP_
#define PNO_METRICS_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pno/predictor.hpp"
#include "pno/problem.hpp"
#include "pno/solvers.hpp"

namespace pno {

/// f(z_hat, y); throws FeasibilityError if z_hat is infeasible.
double decision_quality(const ProblemSpec& spec, std::span<const double> z_hat,
                        std::span<const double> y);

/// |f(z*(y), y) - f(z*(y_hat), y)|.
double regret(const ProblemSpec& spec, std::span<const double> y_hat,
              std::span<const double> y, const SolverOptions& solver = {});
/// Same, with both decisions already solved.
double regret_of(const ProblemSpec& spec, std::span<const double> z_hat,
                 std::span<const double> z_star, std::span<const double> y);

/// 100 * sum(regrets) / sum(|optima|). Throws UndefinedMetricError when the
/// optima sum to zero or the lists are empty.
double relative_regret(std::span<const double> regrets,
                       std::span<const double> optima);
/// Predicts every instance with `model`, solves, and aggregates as above.
double relative_regret(const ProblemSpec& spec,
                       const std::vector<Instance>& instances,
                       const MlpModel& model, const SolverOptions& solver = {});

/// Strategy chosen per user by an advertising decision, -1 for none.
std::vector<int> advertising_assignments(const ProblemSpec& spec,
                                         std::span<const double> z);

/// Conversion rate of users whose assigned strategy equals the logged one,
/// minus the rate of the rest. Throws UndefinedMetricError naming an empty
/// group.
double uplift(std::span<const int> assignments, const AdvertisingLog& log);
/// Same split, scored with the true conversion probabilities of the logged
/// strategies (`y` is users x strategies) instead of the sampled flags.
double expected_uplift(std::span<const int> assignments,
                       const AdvertisingLog& log, std::span<const double> y,
                       std::size_t strategies);

struct MetricRecord {
  std::string run_id;
  int epoch = 0;
  std::string split;   // train | validation | test
  std::string metric;
  double value = 0.0;

  nlohmann::json to_json() const;
};

}  // namespace pno

#endif  // PNO_METRICS_HPP_
