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

// Problem definitions: the fixed parameters of each optimization problem, the
// objective f(z, y) and its derivatives, and feasibility checking.
//
// Decision vectors and coefficient vectors are always flat row-major arrays.
// Matrix-shaped quantities use these layouts:
//   budget allocation   y: websites x users,    z: websites
//   matching            y: side x side,         z: side x side
//   advertising         y: users x strategies,  z: users x strategies
//   scheduling          y: timeslots,           z: jobs x machines x timeslots

#ifndef PNO_PROBLEM_HPP_
#define PNO_PROBLEM_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pno/autodiff.hpp"
#include "pno/tensor.hpp"

namespace pno {

enum class ProblemKind {
  kKnapsack,
  kTopK,
  kBudgetAllocation,
  kMatching,
  kPortfolio,
  kAdvertising,
  kScheduling,
};

enum class Sense { kMaximize, kMinimize };

const char* to_string(ProblemKind kind);
const char* to_string(Sense sense);
ProblemKind problem_kind_from_string(const std::string& s);
Sense sense_from_string(const std::string& s);

struct Job {
  int earliest_start = 0;
  int latest_end = 0;
  int duration = 0;
  double power = 0.0;
  std::vector<double> resource_usage;  // one entry per resource
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kKnapsack;
  Sense sense = Sense::kMaximize;

  // knapsack
  std::vector<double> weights;
  double capacity = 0.0;
  // top-k
  std::size_t items = 0;
  std::size_t k = 0;
  // budget allocation
  std::size_t websites = 0;
  std::size_t users = 0;  // also used by advertising
  std::size_t budget = 0;
  // matching
  std::size_t side = 0;
  // portfolio
  Tensor covariance{Shape{0, 0}};
  double risk_aversion = 0.1;
  // advertising
  std::vector<double> strategy_costs;
  double total_budget = 0.0;
  // scheduling
  std::size_t machines = 3;
  std::size_t resources = 1;
  std::size_t timeslots = 48;
  std::vector<Job> jobs;
  Tensor machine_capacity{Shape{0, 0}};  // machines x resources

  /// Number of items a flat coefficient vector y must have.
  std::size_t coefficient_size() const;
  /// Number of entries of a flat decision vector z.
  std::size_t decision_size() const;
  /// Whether f(z, y) is linear in y with coefficient z (the plain bilinear
  /// problems: knapsack, top-k, matching, advertising).
  bool bilinear() const;
  /// +1 for minimize, -1 for maximize: F = sign * f is the cost to minimize.
  double cost_sign() const { return sense == Sense::kMinimize ? 1.0 : -1.0; }

  /// Throws ParameterError describing the first broken invariant.
  void validate() const;

  nlohmann::json to_json() const;
  static ProblemSpec from_json(const nlohmann::json& j);
};

ProblemSpec make_knapsack(std::vector<double> weights, double capacity,
                          Sense sense = Sense::kMaximize);
ProblemSpec make_topk(std::size_t n, std::size_t k,
                      Sense sense = Sense::kMaximize);
ProblemSpec make_budget_allocation(std::size_t websites, std::size_t users,
                                   std::size_t budget);
ProblemSpec make_matching(std::size_t side, Sense sense = Sense::kMaximize);
ProblemSpec make_portfolio(Tensor covariance, double risk_aversion = 0.1);
ProblemSpec make_advertising(std::size_t users,
                             std::vector<double> strategy_costs,
                             double total_budget,
                             Sense sense = Sense::kMaximize);

struct Solution {
  std::vector<double> z;
  bool feasible = true;
  std::optional<double> objective;
  /// Optimality residual for iterative solvers.
  std::optional<double> residual;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violations;
};

enum class Domain {
  kDiscrete,  // entries must be 0/1 (portfolio is always continuous)
  kRelaxed,   // entries in [0, 1]
};

FeasibilityReport check_feasible(const ProblemSpec& spec,
                                 std::span<const double> z,
                                 Domain domain = Domain::kDiscrete);

/// f(z, y). Throws FeasibilityError listing violations if z is infeasible
/// (checked in the relaxed domain, so fractional relaxation outputs are
/// accepted).
double objective(const ProblemSpec& spec, std::span<const double> z,
                 std::span<const double> y);
/// f(z, y) without the feasibility check.
double objective_unchecked(const ProblemSpec& spec, std::span<const double> z,
                           std::span<const double> y);

/// For every kind except budget allocation f is affine in y:
/// f(z, y) = a(z) . y + b(z). Throws UnsupportedError for budget allocation.
struct AffineForm {
  std::vector<double> slope;
  double offset = 0.0;
};
AffineForm affine_in_y(const ProblemSpec& spec, std::span<const double> z);

/// Gradient of f(z, y) with respect to y at fixed z.
std::vector<double> objective_grad_y(const ProblemSpec& spec,
                                     std::span<const double> z,
                                     std::span<const double> y);
/// Gradient of f(z, y) with respect to z at fixed y.
std::vector<double> objective_grad_z(const ProblemSpec& spec,
                                     std::span<const double> z,
                                     std::span<const double> y);

/// Adds a node of shape {S, 1} holding f(z_s, y_hat) for every z_s in
/// `solutions`. `y_hat` may have any shape with coefficient_size() entries.
/// Budget allocation needs every y_hat entry at most 1.
NodeId objective_values_node(Graph& graph, const ProblemSpec& spec,
                             const std::vector<std::vector<double>>& solutions,
                             NodeId y_hat);

struct AdvertisingLog {
  std::vector<int> strategy;    // logged strategy per user
  std::vector<int> converted;   // 0/1 per user
};

/// One (x, y) pair. x is a feature matrix whose rows are fed to the
/// predictor; the predictor output, flattened row-major, lines up with y.
struct Instance {
  Tensor x;
  Tensor y;
  std::optional<AdvertisingLog> log;
};

struct Dataset {
  ProblemSpec spec;
  std::vector<Instance> train;
  std::vector<Instance> test;
  nlohmann::json provenance = nlohmann::json::object();
};

/// Checks every instance's y against the spec's coefficient size.
void validate_dataset(const Dataset& data);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
nlohmann::json dataset_to_json(const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& j);
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace pno

#endif  // PNO_PROBLEM_HPP_
