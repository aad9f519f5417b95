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

// Experiment protocol: per-instance Adam training with validation-based early
// stopping and checkpoint selection, learning-rate grids, sweeps, and report
// files.

#ifndef PNO_HARNESS_HPP_
#define PNO_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pno/losses.hpp"
#include "pno/predictor.hpp"
#include "pno/problem.hpp"
#include "pno/solvers.hpp"

namespace pno {

struct RunConfig {
  std::string run_id;  // derived from problem/method/seed when empty
  /// Data source: knapsack_gen, cubic_topk, advertising, budget_allocation,
  /// matching, portfolio, dataset (a saved dataset JSON at data.path) or
  /// tabular (CSV at data.path, see make_dataset).
  std::string problem = "knapsack_gen";
  nlohmann::json data = nlohmann::json::object();
  LossConfig loss;
  std::vector<double> lr_grid = {0.1, 0.05, 0.01, 0.005, 0.001};
  double learning_rate = 0.01;
  int max_epochs = 300;
  int patience = 50;
  double validation_fraction = 0.2;
  int pretrain_epochs = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {32, 32};
  /// Advertising only: "observed" scores validation/test uplift with the
  /// logged conversion flags, "expected" with the true probabilities.
  std::string uplift_mode = "observed";
  /// Command for ExternalProcessSolver; required for scheduling.
  std::string external_solver;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
  std::string effective_run_id() const;
  nlohmann::json to_json() const;
  /// Missing fields take the defaults of default_run_config(problem).
  static RunConfig from_json(const nlohmann::json& j);
};

/// Defaults per data source: BCE with a sigmoid head for advertising, budget
/// allocation and matching; hidden widths {128, 64, 32} for advertising.
RunConfig default_run_config(const std::string& problem, Method method);

/// Builds the dataset named by config.problem, seeding generators with
/// config.seed unless data.seed is given. Tabular sources read data.path with
/// data.features, data.targets, data.group, data.spec (a ProblemSpec JSON)
/// and data.test_fraction (default 0.2, taken from the end).
Dataset make_dataset(const RunConfig& config);

struct EpochRecord {
  int epoch = 0;
  std::string phase;      // "pretrain" or "train"
  std::string loss_kind;  // the loss optimized in this epoch
  double train_loss = 0.0;
  double val_metric = 0.0;
  double train_seconds = 0.0;
  double val_seconds = 0.0;
};

struct RunReport {
  std::string run_id;
  std::string problem;
  std::string method;
  std::uint64_t seed = 0;
  double learning_rate = 0.0;
  int pretrain_epochs = 0;
  std::string selection_metric;  // relative_regret (minimized) or uplift
  std::vector<EpochRecord> epochs;
  int selected_epoch = 0;
  double best_val_metric = 0.0;
  double test_relative_regret = 0.0;
  std::optional<double> test_uplift;
  std::optional<double> test_expected_uplift;
  double test_seconds = 0.0;
  double lodl_fit_seconds = 0.0;
  nlohmann::json model;  // checkpoint of the selected epoch

  nlohmann::json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
};

/// Everything shared by runs that differ only in learning rate.
struct PreparedRun {
  Dataset data;
  std::vector<Instance> train, validation;
  std::vector<Solution> train_opt, val_opt, test_opt;  // exact z*(y)
  std::size_t output_width = 0;  // predictor outputs per feature row
  SolverOptions solver;
  std::optional<SolutionCache> cache;
  std::vector<LodlSurrogate> lodl;
  double lodl_fit_seconds = 0.0;
};

/// Validates the config, builds the data, splits off validation, solves every
/// instance, and builds the cache or LODL surrogates the method needs.
/// Throws ConfigError for incompatible method/problem pairs.
PreparedRun prepare_run(const RunConfig& config);

/// One training run at `learning_rate` on prepared data.
RunReport train_prepared(const RunConfig& config, const PreparedRun& prepared,
                         double learning_rate);
RunReport run_training(const RunConfig& config);

/// Evaluates a checkpoint on the test split of `data`.
struct TestEvaluation {
  double relative_regret = 0.0;
  std::optional<double> uplift;
  std::optional<double> expected_uplift;
};
TestEvaluation evaluate_model(const MlpModel& model, const Dataset& data,
                              const SolverOptions& solver = {});

struct GridResult {
  RunReport best;
  std::vector<RunReport> runs;  // one per grid entry, in grid order
  std::vector<std::string> errors;  // empty for successful entries
};
/// Runs every learning rate of config.lr_grid, concurrently on
/// PNOBENCH_WORKERS threads (default 1). Picks the best validation metric;
/// the lower grid index wins ties. A failed entry keeps its learning rate,
/// NaN metrics and its message in `errors`. Throws Error of kind
/// "grid_failed" aggregating the messages if every run fails.
GridResult grid_search(const RunConfig& config);
/// Reads PNOBENCH_WORKERS; throws ConfigError if it is not a positive integer.
int worker_count();

enum class SweepAxis { kCapacity, kVariableSize, kGeneralizationCapacity };
SweepAxis sweep_axis_from_string(const std::string& s);
const char* to_string(SweepAxis axis);

/// Capacity and size axes regenerate data per value and run grid_search;
/// the generalization axis trains at values[0] and evaluates that model on
/// test sets regenerated at every value.
std::vector<RunReport> sweep(const RunConfig& base, SweepAxis axis,
                             const std::vector<double>& values);

enum class ReportFormat { kJson, kCsv };
ReportFormat report_format_from_string(const std::string& s);
/// Writes summary.<ext> (one row per report) and curves.<ext> (one row per
/// trained epoch per report) into `dir`, creating it if needed. JSON output
/// also writes records.jsonl with one metric record per line.
void emit_report(const std::vector<RunReport>& reports, const std::string& dir,
                 ReportFormat format);

}  // namespace pno

#endif  // PNO_HARNESS_HPP_
