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

#include "pno/metrics.hpp"

#include <cmath>

#include "pno/error.hpp"

namespace pno {

double decision_quality(const ProblemSpec& spec, std::span<const double> z_hat,
                        std::span<const double> y) {
  return objective(spec, z_hat, y);
}

double regret_of(const ProblemSpec& spec, std::span<const double> z_hat,
                 std::span<const double> z_star, std::span<const double> y) {
  return std::abs(objective_unchecked(spec, z_star, y) -
                  objective_unchecked(spec, z_hat, y));
}

double regret(const ProblemSpec& spec, std::span<const double> y_hat,
              std::span<const double> y, const SolverOptions& solver) {
  const Solution z_star = solve(spec, y, solver);
  const Solution z_hat = solve(spec, y_hat, solver);
  return regret_of(spec, z_hat.z, z_star.z, y);
}

double relative_regret(std::span<const double> regrets,
                       std::span<const double> optima) {
  if (regrets.empty() || regrets.size() != optima.size()) {
    throw UndefinedMetricError(
        "relative regret: need one optimum per regret and at least one");
  }
  double r = 0.0, o = 0.0;
  for (std::size_t i = 0; i < regrets.size(); ++i) {
    r += regrets[i];
    o += std::abs(optima[i]);
  }
  if (o == 0.0) {
    throw UndefinedMetricError("relative regret: optimal objectives sum to 0");
  }
  return 100.0 * r / o;
}

double relative_regret(const ProblemSpec& spec,
                       const std::vector<Instance>& instances,
                       const MlpModel& model, const SolverOptions& solver) {
  std::vector<double> regrets, optima;
  for (const auto& inst : instances) {
    const Tensor y_hat = predict(model, inst.x);
    const Solution z_star = solve(spec, inst.y.values(), solver);
    const Solution z_hat = solve(spec, y_hat.values(), solver);
    regrets.push_back(regret_of(spec, z_hat.z, z_star.z, inst.y.values()));
    optima.push_back(objective_unchecked(spec, z_star.z, inst.y.values()));
  }
  return relative_regret(regrets, optima);
}

std::vector<int> advertising_assignments(const ProblemSpec& spec,
                                         std::span<const double> z) {
  if (spec.kind != ProblemKind::kAdvertising) {
    throw ParameterError("advertising_assignments: spec is not advertising");
  }
  const std::size_t S = spec.strategy_costs.size();
  if (z.size() != spec.users * S) {
    throw DimensionError("advertising_assignments: decision has wrong size");
  }
  std::vector<int> out(spec.users, -1);
  for (std::size_t i = 0; i < spec.users; ++i) {
    for (std::size_t j = 0; j < S; ++j) {
      if (z[i * S + j] > 0.5) out[i] = static_cast<int>(j);
    }
  }
  return out;
}

namespace {

double split_rates(std::span<const int> assignments, const AdvertisingLog& log,
                   const std::function<double(std::size_t)>& outcome) {
  if (assignments.size() != log.strategy.size() ||
      log.converted.size() != log.strategy.size()) {
    throw DimensionError("uplift: assignments and log differ in length");
  }
  if (assignments.empty()) throw UndefinedMetricError("uplift: empty log");
  double treat = 0.0, control = 0.0;
  std::size_t n_treat = 0, n_control = 0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == log.strategy[i]) {
      treat += outcome(i);
      ++n_treat;
    } else {
      control += outcome(i);
      ++n_control;
    }
  }
  if (n_treat == 0) throw UndefinedMetricError("uplift: treatment group is empty");
  if (n_control == 0) throw UndefinedMetricError("uplift: control group is empty");
  return treat / static_cast<double>(n_treat) -
         control / static_cast<double>(n_control);
}

}  // namespace

double uplift(std::span<const int> assignments, const AdvertisingLog& log) {
  return split_rates(assignments, log, [&](std::size_t i) {
    return static_cast<double>(log.converted[i]);
  });
}

double expected_uplift(std::span<const int> assignments,
                       const AdvertisingLog& log, std::span<const double> y,
                       std::size_t strategies) {
  if (y.size() != log.strategy.size() * strategies) {
    throw DimensionError("expected_uplift: probabilities have the wrong size");
  }
  return split_rates(assignments, log, [&](std::size_t i) {
    return y[i * strategies + static_cast<std::size_t>(log.strategy[i])];
  });
}

nlohmann::json MetricRecord::to_json() const {
  return {{"run_id", run_id}, {"epoch", epoch}, {"split", split},
          {"metric", metric}, {"value", value}};
}

}  // namespace pno
