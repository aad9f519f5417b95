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

#include "pno/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "pno/error.hpp"
#include "pno/generators.hpp"
#include "pno/log.hpp"
#include "pno/metrics.hpp"
#include "pno/tabular.hpp"

namespace pno {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// splitmix64 finalizer, used to derive independent RNG streams from one seed.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return kNaN;
  return j[key].get<double>();
}

bool uses_uplift(const ProblemSpec& spec) {
  return spec.kind == ProblemKind::kAdvertising;
}

// ---------------------------------------------------------------------------
// Data sources.

class ParamReader {
 public:
  ParamReader(const json& j, std::string source) : j_(j), source_(std::move(source)) {
    if (!j_.is_object()) throw ConfigError(source_ + ": data must be a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_[key].get<T>();
    } catch (const json::exception&) {
      throw ConfigError(source_ + ": data." + key + " has the wrong type");
    }
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.count(key)) {
        throw ConfigError(source_ + ": unknown data parameter '" + key + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string source_;
  std::set<std::string> used_;
};

template <typename Fn>
Dataset generate_or_config_error(Fn&& fn) {
  try {
    return fn();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

Dataset load_tabular_source(const json& data, std::uint64_t seed) {
  ParamReader r(data, "tabular");
  std::string path, test_path, group;
  std::vector<std::string> features, targets;
  json spec_json;
  double test_fraction = 0.2;
  std::uint64_t unused_seed = seed;
  r.read("path", path);
  r.read("test_path", test_path);
  r.read("features", features);
  r.read("targets", targets);
  r.read("group", group);
  r.read("spec", spec_json);
  r.read("test_fraction", test_fraction);
  r.read("seed", unused_seed);
  r.finish();
  if (path.empty()) throw ConfigError("tabular: data.path is required");
  if (features.empty() || targets.empty()) {
    throw ConfigError("tabular: data.features and data.targets are required");
  }
  if (spec_json.is_null()) throw ConfigError("tabular: data.spec is required");

  Dataset out;
  try {
    out.spec = ProblemSpec::from_json(spec_json);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("tabular: ") + e.what());
  }
  const TabularSchema schema{features, targets, group};
  std::vector<Instance> all = load_tabular(path, schema);
  if (!test_path.empty()) {
    out.train = std::move(all);
    out.test = load_tabular(test_path, schema);
  } else {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw ConfigError("tabular: test_fraction must lie in (0, 1)");
    }
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(all.size())));
    if (n_test == 0 || n_test >= all.size()) {
      throw ConfigError("tabular: " + std::to_string(all.size()) +
                        " instances cannot be split with test_fraction " +
                        std::to_string(test_fraction));
    }
    out.test.assign(all.end() - static_cast<std::ptrdiff_t>(n_test), all.end());
    all.resize(all.size() - n_test);
    out.train = std::move(all);
  }
  // Loaded targets may be shaped like the CSV block; flatten to the spec.
  for (auto* split : {&out.train, &out.test}) {
    for (Instance& inst : *split) {
      inst.y = inst.y.reshaped(Shape{inst.y.size()});
    }
  }
  out.provenance = {{"source", "tabular"}, {"path", path}, {"test_path", test_path},
                    {"features", features}, {"targets", targets}, {"group", group},
                    {"test_fraction", test_fraction}};
  try {
    validate_dataset(out);
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("tabular: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation.

struct SplitScore {
  double relative_regret = kNaN;
  std::optional<double> uplift;
  std::optional<double> expected_uplift;
};

SplitScore score_split(const ProblemSpec& spec,
                       const std::vector<Instance>& instances,
                       const std::vector<Solution>& optima,
                       const MlpModel& model, const SolverOptions& solver) {
  SplitScore score;
  std::vector<double> regrets, values;
  std::vector<int> assignments;
  AdvertisingLog pooled;
  std::vector<double> pooled_y;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Instance& inst = instances[i];
    const Tensor y_hat = predict(model, inst.x);
    const Solution z_hat = solve(spec, y_hat.data(), solver);
    regrets.push_back(regret_of(spec, z_hat.z, optima[i].z, inst.y.data()));
    values.push_back(*optima[i].objective);
    if (uses_uplift(spec) && inst.log) {
      const std::vector<int> a = advertising_assignments(spec, z_hat.z);
      assignments.insert(assignments.end(), a.begin(), a.end());
      pooled.strategy.insert(pooled.strategy.end(), inst.log->strategy.begin(),
                             inst.log->strategy.end());
      pooled.converted.insert(pooled.converted.end(),
                              inst.log->converted.begin(),
                              inst.log->converted.end());
      pooled_y.insert(pooled_y.end(), inst.y.values().begin(), inst.y.values().end());
    }
  }
  try {
    score.relative_regret = relative_regret(regrets, values);
  } catch (const UndefinedMetricError& e) {
    warn(e.what());
  }
  if (!assignments.empty()) {
    try {
      score.uplift = uplift(assignments, pooled);
      score.expected_uplift = expected_uplift(assignments, pooled, pooled_y,
                                              spec.strategy_costs.size());
    } catch (const UndefinedMetricError& e) {
      warn(e.what());
    }
  }
  return score;
}

std::vector<Solution> solve_all(const ProblemSpec& spec,
                                const std::vector<Instance>& instances,
                                const SolverOptions& solver) {
  std::vector<Solution> out;
  out.reserve(instances.size());
  for (const Instance& inst : instances) {
    out.push_back(solve(spec, inst.y.data(), solver));
    if (!out.back().objective) {
      out.back().objective = objective(spec, out.back().z, inst.y.data());
    }
  }
  return out;
}

std::optional<StatVariant> stat_variant(Method m) {
  switch (m) {
    case Method::kNce: return StatVariant::kNce;
    case Method::kLtrPointwise: return StatVariant::kPointwise;
    case Method::kLtrPairwise: return StatVariant::kPairwise;
    case Method::kLtrListwise: return StatVariant::kListwise;
    default: return std::nullopt;
  }
}

std::optional<InterpVariant> interp_variant(Method m) {
  switch (m) {
    case Method::kBlackbox: return InterpVariant::kBlackbox;
    case Method::kIdentity: return InterpVariant::kIdentity;
    case Method::kPerturb: return InterpVariant::kPerturb;
    case Method::kImle: return InterpVariant::kImle;
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Compatibility checks, run before any training.

void check_compatible(const RunConfig& cfg, const PreparedRun& p) {
  const ProblemSpec& spec = p.data.spec;
  const Method method = cfg.loss.method;
  const std::string pair =
      std::string(to_string(method)) + " on " + to_string(spec.kind);
  const bool decisions_match = spec.coefficient_size() == spec.decision_size();
  if (interp_variant(method) && !decisions_match) {
    throw ConfigError(pair + ": interpolated solver gradients need one "
                      "decision entry per coefficient");
  }
  if (method == Method::kSpoPlus && spec.kind == ProblemKind::kBudgetAllocation) {
    throw ConfigError(pair + ": SPO+ needs an objective affine in the "
                      "coefficients");
  }
  if (method == Method::kQptl && (spec.kind == ProblemKind::kBudgetAllocation ||
                                  spec.kind == ProblemKind::kScheduling)) {
    throw ConfigError(pair + ": no quadratic relaxation for this problem");
  }
  if (spec.kind == ProblemKind::kScheduling && cfg.external_solver.empty()) {
    throw ConfigError("scheduling needs external_solver to be set");
  }
  if (cfg.loss.pto_loss == PtoLossKind::kBce) {
    for (const Instance& inst : p.data.train) {
      for (double v : inst.y.values()) {
        if (v < 0.0 || v > 1.0) {
          throw ConfigError("bce pretraining loss needs targets in [0, 1]");
        }
      }
    }
  }
}

std::size_t output_width_for(const Dataset& data) {
  const std::size_t n = data.spec.coefficient_size();
  const std::size_t rows = data.train.front().x.rows();
  const std::size_t cols = data.train.front().x.cols();
  for (const auto* split : {&data.train, &data.test}) {
    for (const Instance& inst : *split) {
      if (inst.x.rows() != rows || inst.x.cols() != cols) {
        throw ConfigError("feature matrices differ in shape across instances");
      }
    }
  }
  if (rows == 0 || n % rows != 0) {
    throw ConfigError("coefficient count " + std::to_string(n) +
                      " is not a multiple of the feature row count " +
                      std::to_string(rows));
  }
  return n / rows;
}

// ---------------------------------------------------------------------------
// Training loop.

// One graph per loss family, built once: the predictor feeds a flattened
// prediction node that the loss head reads.
struct LossGraph {
  Graph graph;
  NodeId flat;
  NodeId head;
};

class Trainer {
 public:
  Trainer(const RunConfig& cfg, const PreparedRun& prep, double lr)
      : cfg_(cfg),
        prep_(prep),
        spec_(prep.data.spec),
        n_(spec_.coefficient_size()),
        model_(widths(), head_for(cfg.loss.pto_loss), cfg.seed),
        adam_(lr),
        lr_(lr),
        order_rng_(mix(cfg.seed ^ 0x6f72646572ULL)),
        noise_rng_(mix(cfg.seed ^ 0x6e6f697365ULL)) {
    train_solver_ = prep.solver;
    if (cfg.loss.method == Method::kSpoPlus && cfg.loss.spo_relax &&
        spec_.kind == ProblemKind::kKnapsack) {
      train_solver_.relaxed = true;
    }
    if (prep.cache) cache_ = *prep.cache;
    build_pto();
    build_decision();
    if (stat_variant(cfg.loss.method)) build_statistical();
    if (cfg.loss.method == Method::kLodl) build_lodl();
  }

  RunReport run() {
    RunReport rep;
    rep.run_id = cfg_.effective_run_id();
    rep.problem = cfg_.problem;
    rep.method = to_string(cfg_.loss.method);
    rep.seed = cfg_.seed;
    rep.learning_rate = lr_;
    rep.pretrain_epochs = cfg_.pretrain_epochs;
    rep.lodl_fit_seconds = prep_.lodl_fit_seconds;
    const bool by_uplift = uses_uplift(spec_);
    rep.selection_metric = by_uplift ? "uplift" : "relative_regret";

    std::vector<Tensor> best_params = model_.parameters();
    double best = kNaN;
    int since_best = 0;
    std::vector<std::size_t> order(prep_.train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg_.max_epochs; ++epoch) {
      const bool pretrain = epoch <= cfg_.pretrain_epochs;
      // Patience starts counting afresh when the decision-focused phase begins.
      if (cfg_.pretrain_epochs > 0 && epoch == cfg_.pretrain_epochs + 1) since_best = 0;
      EpochRecord rec;
      rec.epoch = epoch;
      rec.phase = pretrain ? "pretrain" : "train";
      rec.loss_kind = (pretrain || cfg_.loss.method == Method::kTwoStage)
                          ? to_string(cfg_.loss.pto_loss)
                          : to_string(cfg_.loss.method);

      const auto t0 = Clock::now();
      std::shuffle(order.begin(), order.end(), order_rng_);
      double total = 0.0;
      for (std::size_t i : order) total += step(i, pretrain);
      rec.train_loss = total / static_cast<double>(order.size());
      rec.train_seconds = seconds_since(t0);

      const auto t1 = Clock::now();
      const SplitScore s =
          score_split(spec_, prep_.validation, prep_.val_opt, model_, prep_.solver);
      rec.val_metric = by_uplift ? selected_uplift(s) : s.relative_regret;
      rec.val_seconds = seconds_since(t1);
      rep.epochs.push_back(rec);

      const bool improved =
          std::isfinite(rec.val_metric) &&
          (!std::isfinite(best) ||
           (by_uplift ? rec.val_metric > best : rec.val_metric < best));
      if (improved) {
        best = rec.val_metric;
        best_params = model_.parameters();
        rep.selected_epoch = epoch;
        since_best = 0;
      } else if (!pretrain) {
        if (++since_best >= cfg_.patience) break;
      }
    }

    model_.parameters() = best_params;
    rep.best_val_metric = best;
    const auto t2 = Clock::now();
    const SplitScore test =
        score_split(spec_, prep_.data.test, prep_.test_opt, model_, prep_.solver);
    rep.test_seconds = seconds_since(t2);
    rep.test_relative_regret = test.relative_regret;
    rep.test_uplift = test.uplift;
    rep.test_expected_uplift = test.expected_uplift;
    rep.model = model_.to_json();
    return rep;
  }

 private:
  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w{prep_.data.train.front().x.cols()};
    w.insert(w.end(), cfg_.hidden.begin(), cfg_.hidden.end());
    w.push_back(prep_.output_width);
    return w;
  }

  double selected_uplift(const SplitScore& s) const {
    const auto& v = cfg_.uplift_mode == "expected" ? s.expected_uplift : s.uplift;
    return v ? *v : kNaN;
  }

  void init_graph(LossGraph& lg) {
    lg.graph = Graph();
    NodeId out = model_.build(lg.graph, lg.graph.input("x"));
    lg.flat = lg.graph.reshape(out, Shape{n_});
  }

  void build_pto() {
    init_graph(pto_);
    pto_.head = pto_loss_node(pto_.graph, pto_.flat, pto_.graph.input("y"),
                              cfg_.loss.pto_loss);
    pto_.graph.set_root(pto_.head);
  }

  void build_decision() {
    init_graph(dec_);
    dec_.head = dec_.graph.boundary(dec_.flat);
    dec_.graph.set_root(dec_.graph.sum(dec_.head));
  }

  void build_statistical() {
    init_graph(stat_);
    stat_.head = statistical_loss_node(stat_.graph, *stat_variant(cfg_.loss.method),
                                       spec_, cache_, stat_.flat, cfg_.loss);
    stat_.graph.set_root(stat_.head);
  }

  void build_lodl() {
    init_graph(lodl_);
    lodl_.head = lodl_loss_node(lodl_.graph, lodl_.flat);
    lodl_.graph.set_root(lodl_.head);
  }

  void apply(const NamedTensors& grads) {
    std::vector<Tensor> g;
    g.reserve(model_.parameter_names().size());
    for (const std::string& name : model_.parameter_names()) g.push_back(grads.at(name));
    adam_.step(model_.parameters(), g, model_.parameter_names());
  }

  // Runs the graph with `inputs` and seeds its scalar root.
  double descend(LossGraph& lg, const NamedTensors& inputs) {
    const double loss = lg.graph.forward(inputs).item();
    apply(lg.graph.backward(Tensor::scalar(1.0)));
    return loss;
  }

  double step(std::size_t i, bool pretrain) {
    const Instance& inst = prep_.train[i];
    const std::span<const double> y = inst.y.data();
    const std::vector<double>& z_star = prep_.train_opt[i].z;
    NamedTensors in = model_.bind(inst.x);
    const Method method = cfg_.loss.method;

    if (pretrain || method == Method::kTwoStage) {
      in.emplace("y", inst.y.reshaped(Shape{n_}));
      return descend(pto_, in);
    }
    if (auto variant = stat_variant(method)) {
      std::size_t star = 0;
      if (*variant == StatVariant::kNce) {
        const auto idx = cache_.find(z_star);
        if (!idx) throw StateError("solution cache lost an instance optimum");
        star = *idx;
      }
      in.emplace("stat_target",
                 statistical_target(*variant, spec_, cache_, y, star, cfg_.loss));
      const double loss = descend(stat_, in);
      maybe_grow_cache();
      return loss;
    }
    if (method == Method::kLodl) {
      const LodlSurrogate& s = prep_.lodl[i];
      in.emplace("lodl_weights", Tensor(Shape{n_}, s.weights));
      in.emplace("lodl_center", Tensor(Shape{n_}, s.center));
      return descend(lodl_, in);
    }

    // Solver-in-the-loop methods: the prediction leaves the graph, a gradient
    // comes back through the boundary node.
    dec_.graph.forward(in);
    const std::vector<double> y_hat = dec_.graph.value(dec_.flat).values();
    const double s = spec_.cost_sign();
    std::vector<double> grad;
    double loss = 0.0;
    if (method == Method::kSpoPlus) {
      LossAndGrad lg = spo_plus_loss(spec_, y_hat, y, train_solver_);
      grad = std::move(lg.grad);
      loss = lg.loss;
    } else if (method == Method::kQptl) {
      const QptlResult fwd = qptl_forward(spec_, y_hat, cfg_.loss.qp_gamma);
      std::vector<double> dl_dz = objective_grad_z(spec_, fwd.z, y);
      for (double& v : dl_dz) v *= s;
      grad = qptl_backward(spec_, fwd, dl_dz);
      loss = s * (objective_unchecked(spec_, fwd.z, y) - *prep_.train_opt[i].objective);
    } else {
      const Solution z_hat = solve(spec_, y_hat, train_solver_);
      loss = regret_of(spec_, z_hat.z, z_star, y);
      if (method == Method::kDfl) {
        grad = dfl_gradient(spec_, y_hat, z_hat.z);
      } else {
        std::vector<double> dl_dz = objective_grad_z(spec_, z_hat.z, y);
        for (double& v : dl_dz) v *= s;
        grad = discrete_interp_gradient(*interp_variant(method), spec_, y_hat,
                                        dl_dz, y, cfg_.loss, noise_rng_,
                                        train_solver_);
      }
    }
    dec_.graph.clear_injections();
    dec_.graph.inject(dec_.head, Tensor(Shape{n_}, std::move(grad)));
    apply(dec_.graph.backward(Tensor::scalar(1.0)));
    return loss;
  }

  void maybe_grow_cache() {
    if (cfg_.loss.cache_growth <= 0.0) return;
    std::bernoulli_distribution grow(cfg_.loss.cache_growth);
    if (!grow(noise_rng_)) return;
    const std::vector<double> y_hat = stat_.graph.value(stat_.flat).values();
    const Solution z = solve(spec_, y_hat, prep_.solver);
    if (cache_.add(z.z, CacheOrigin::kTraining)) build_statistical();
  }

  const RunConfig& cfg_;
  const PreparedRun& prep_;
  const ProblemSpec& spec_;
  std::size_t n_;
  MlpModel model_;
  AdamState adam_;
  double lr_;
  std::mt19937_64 order_rng_, noise_rng_;
  SolverOptions train_solver_;
  SolutionCache cache_;
  LossGraph pto_, dec_, stat_, lodl_;
};

// ---------------------------------------------------------------------------
// Sweeps.

std::string format_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

RunConfig sweep_cell(const RunConfig& base, SweepAxis axis, double value) {
  RunConfig cell = base;
  if (base.problem == "knapsack_gen") {
    KnapsackGenParams defaults;
    if (axis == SweepAxis::kVariableSize) {
      const double n0 = base.data.value("n_items", static_cast<double>(defaults.n_items));
      const double c0 = base.data.value("capacity", defaults.capacity);
      cell.data["n_items"] = static_cast<std::size_t>(std::llround(value));
      cell.data["capacity"] = c0 * value / n0;
    } else {
      cell.data["capacity"] = value;
    }
  } else if (base.problem == "cubic_topk" && axis == SweepAxis::kVariableSize) {
    CubicTopKParams defaults;
    const double n0 = base.data.value("n_items", static_cast<double>(defaults.n_items));
    const double k0 = base.data.value("k", static_cast<double>(defaults.k));
    cell.data["n_items"] = static_cast<std::size_t>(std::llround(value));
    cell.data["k"] = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(k0 * value / n0)));
  } else {
    throw ConfigError(std::string("sweep axis ") + to_string(axis) +
                      " does not apply to " + base.problem);
  }
  cell.run_id = base.effective_run_id() + "_" + to_string(axis) + "_" + format_value(value);
  return cell;
}

// ---------------------------------------------------------------------------
// Report files.

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "run_id", "problem", "method", "seed", "learning_rate", "pretrain_epochs",
      "selection_metric", "epochs_trained", "selected_epoch", "best_val_metric",
      "test_relative_regret", "test_uplift", "test_expected_uplift",
      "mean_train_seconds", "mean_val_seconds", "test_seconds",
      "lodl_fit_seconds"};
  return cols;
}

const std::vector<std::string>& curve_columns() {
  static const std::vector<std::string> cols = {
      "run_id", "epoch", "phase", "loss_kind", "train_loss", "val_metric",
      "train_seconds", "val_seconds"};
  return cols;
}

json summary_row(const RunReport& r) {
  double train_s = 0.0, val_s = 0.0;
  for (const EpochRecord& e : r.epochs) {
    train_s += e.train_seconds;
    val_s += e.val_seconds;
  }
  const double n = r.epochs.empty() ? 1.0 : static_cast<double>(r.epochs.size());
  return {{"run_id", r.run_id},
          {"problem", r.problem},
          {"method", r.method},
          {"seed", r.seed},
          {"learning_rate", r.learning_rate},
          {"pretrain_epochs", r.pretrain_epochs},
          {"selection_metric", r.selection_metric},
          {"epochs_trained", r.epochs.size()},
          {"selected_epoch", r.selected_epoch},
          {"best_val_metric", number_or_null(r.best_val_metric)},
          {"test_relative_regret", number_or_null(r.test_relative_regret)},
          {"test_uplift", r.test_uplift ? json(*r.test_uplift) : json(nullptr)},
          {"test_expected_uplift",
           r.test_expected_uplift ? json(*r.test_expected_uplift) : json(nullptr)},
          {"mean_train_seconds", train_s / n},
          {"mean_val_seconds", val_s / n},
          {"test_seconds", r.test_seconds},
          {"lodl_fit_seconds", r.lodl_fit_seconds}};
}

json curve_row(const RunReport& r, const EpochRecord& e) {
  return {{"run_id", r.run_id},
          {"epoch", e.epoch},
          {"phase", e.phase},
          {"loss_kind", e.loss_kind},
          {"train_loss", number_or_null(e.train_loss)},
          {"val_metric", number_or_null(e.val_metric)},
          {"train_seconds", e.train_seconds},
          {"val_seconds", e.val_seconds}};
}

std::string cell_text(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
    return buf;
  }
  return v.dump();
}

CsvTable to_table(const std::vector<json>& rows, const std::vector<std::string>& cols) {
  CsvTable t;
  t.header = cols;
  for (const json& row : rows) {
    std::vector<std::string> cells;
    for (const std::string& c : cols) cells.push_back(cell_text(row.at(c)));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

json to_ordered_object(const json& row, const std::vector<std::string>& cols) {
  // Keys are stored sorted; the "columns" list carries the stable order.
  json out = json::object();
  for (const std::string& c : cols) out[c] = row.at(c);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig.

void RunConfig::validate() const {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (patience > max_epochs) throw ConfigError("patience must not exceed max_epochs");
  if (pretrain_epochs < 0) throw ConfigError("pretrain_epochs must be >= 0");
  if (pretrain_epochs > 0 && pretrain_epochs >= max_epochs) {
    throw ConfigError("pretrain_epochs must be below max_epochs");
  }
  if (pretrain_epochs > 0 && loss.method == Method::kTwoStage) {
    throw ConfigError("pretraining only applies to decision-focused methods");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  for (double lr : lr_grid) {
    if (!(lr > 0.0)) throw ConfigError("every lr_grid entry must be > 0");
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("hidden widths must be >= 1");
  }
  if (uplift_mode != "observed" && uplift_mode != "expected") {
    throw ConfigError("uplift_mode must be 'observed' or 'expected'");
  }
  try {
    loss.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

std::string RunConfig::effective_run_id() const {
  if (!run_id.empty()) return run_id;
  return problem + "_" + to_string(loss.method) +
         (pretrain_epochs > 0 ? "_ftn" + std::to_string(pretrain_epochs) : "") +
         "_s" + std::to_string(seed);
}

json RunConfig::to_json() const {
  return {{"run_id", run_id},
          {"problem", problem},
          {"data", data},
          {"loss", loss.to_json()},
          {"lr_grid", lr_grid},
          {"learning_rate", learning_rate},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"validation_fraction", validation_fraction},
          {"pretrain_epochs", pretrain_epochs},
          {"seed", seed},
          {"hidden", hidden},
          {"uplift_mode", uplift_mode},
          {"external_solver", external_solver}};
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  static const std::set<std::string> known = {
      "run_id", "problem", "data", "loss", "method", "lr_grid", "learning_rate",
      "max_epochs", "patience", "validation_fraction", "pretrain_epochs", "seed",
      "hidden", "uplift_mode", "external_solver"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown run config field '" + key + "'");
  }
  try {
    const std::string problem = j.value("problem", std::string("knapsack_gen"));
    json loss_json = j.value("loss", json::object());
    if (j.contains("method")) loss_json["method"] = j["method"];
    const LossConfig parsed = LossConfig::from_json(loss_json);
    RunConfig c = default_run_config(problem, parsed.method);
    const PtoLossKind default_pto = c.loss.pto_loss;
    c.loss = parsed;
    if (!loss_json.contains("pto_loss")) c.loss.pto_loss = default_pto;
    c.run_id = j.value("run_id", c.run_id);
    c.data = j.value("data", c.data);
    c.lr_grid = j.value("lr_grid", c.lr_grid);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
    c.seed = j.value("seed", c.seed);
    c.hidden = j.value("hidden", c.hidden);
    c.uplift_mode = j.value("uplift_mode", c.uplift_mode);
    c.external_solver = j.value("external_solver", c.external_solver);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

RunConfig default_run_config(const std::string& problem, Method method) {
  RunConfig c;
  c.problem = problem;
  c.loss.method = method;
  if (problem == "advertising" || problem == "budget_allocation" ||
      problem == "matching") {
    c.loss.pto_loss = PtoLossKind::kBce;
  }
  if (problem == "advertising") c.hidden = {128, 64, 32};
  return c;
}

Dataset make_dataset(const RunConfig& config) {
  const json& d = config.data;
  const std::string& src = config.problem;
  if (src == "knapsack_gen") {
    KnapsackGenParams p;
    p.seed = config.seed;
    ParamReader r(d, src);
    r.read("n_items", p.n_items);
    r.read("n_features", p.n_features);
    r.read("degree", p.degree);
    r.read("n_train", p.n_train);
    r.read("n_test", p.n_test);
    r.read("noise_half_width", p.noise_half_width);
    r.read("capacity", p.capacity);
    r.read("seed", p.seed);
    r.finish();
    return generate_or_config_error([&] { return generate_knapsack_gen(p); });
  }
  if (src == "cubic_topk") {
    CubicTopKParams p;
    p.seed = config.seed;
    ParamReader r(d, src);
    r.read("n_items", p.n_items);
    r.read("k", p.k);
    r.read("n_train", p.n_train);
    r.read("n_test", p.n_test);
    r.read("seed", p.seed);
    r.finish();
    return generate_or_config_error([&] { return generate_cubic_topk(p); });
  }
  if (src == "advertising") {
    AdvertisingParams p;
    p.seed = config.seed;
    ParamReader r(d, src);
    r.read("n_users", p.n_users);
    r.read("channels", p.channels);
    r.read("n_features", p.n_features);
    r.read("n_train", p.n_train);
    r.read("n_test", p.n_test);
    r.read("per_capita_budget", p.per_capita_budget);
    r.read("seed", p.seed);
    r.finish();
    return generate_or_config_error([&] { return generate_advertising_synthetic(p); });
  }
  if (src == "budget_allocation") {
    BudgetAllocationParams p;
    p.seed = config.seed;
    ParamReader r(d, src);
    r.read("websites", p.websites);
    r.read("users", p.users);
    r.read("budget", p.budget);
    r.read("n_train", p.n_train);
    r.read("n_test", p.n_test);
    r.read("seed", p.seed);
    r.finish();
    return generate_or_config_error([&] { return generate_budget_allocation(p); });
  }
  if (src == "matching") {
    MatchingParams p;
    p.seed = config.seed;
    ParamReader r(d, src);
    r.read("side", p.side);
    r.read("node_features", p.node_features);
    r.read("n_train", p.n_train);
    r.read("n_test", p.n_test);
    r.read("seed", p.seed);
    r.finish();
    return generate_or_config_error([&] { return generate_matching_synthetic(p); });
  }
  if (src == "portfolio") {
    PortfolioParams p;
    p.seed = config.seed;
    ParamReader r(d, src);
    r.read("assets", p.assets);
    r.read("n_features", p.n_features);
    r.read("factors", p.factors);
    r.read("n_train", p.n_train);
    r.read("n_test", p.n_test);
    r.read("risk_aversion", p.risk_aversion);
    r.read("seed", p.seed);
    r.finish();
    return generate_or_config_error([&] { return generate_portfolio_synthetic(p); });
  }
  if (src == "dataset") {
    std::string path;
    ParamReader r(d, src);
    r.read("path", path);
    r.finish();
    if (path.empty()) throw ConfigError("dataset: data.path is required");
    return load_dataset(path);
  }
  if (src == "tabular") return load_tabular_source(d, config.seed);
  throw ConfigError("unknown problem '" + src + "'");
}

// ---------------------------------------------------------------------------
// RunReport.

json RunReport::to_json() const {
  json epochs_json = json::array();
  for (const EpochRecord& e : epochs) {
    json row = curve_row(*this, e);
    row.erase("run_id");
    epochs_json.push_back(std::move(row));
  }
  json j = summary_row(*this);
  j["epochs"] = std::move(epochs_json);
  j["model"] = model;
  return j;
}

RunReport RunReport::from_json(const json& j) {
  try {
    RunReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.problem = j.at("problem").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.learning_rate = j.at("learning_rate").get<double>();
    r.pretrain_epochs = j.value("pretrain_epochs", 0);
    r.selection_metric = j.at("selection_metric").get<std::string>();
    r.selected_epoch = j.at("selected_epoch").get<int>();
    r.best_val_metric = number_or_nan(j, "best_val_metric");
    r.test_relative_regret = number_or_nan(j, "test_relative_regret");
    if (j.contains("test_uplift") && !j["test_uplift"].is_null()) {
      r.test_uplift = j["test_uplift"].get<double>();
    }
    if (j.contains("test_expected_uplift") && !j["test_expected_uplift"].is_null()) {
      r.test_expected_uplift = j["test_expected_uplift"].get<double>();
    }
    r.test_seconds = j.value("test_seconds", 0.0);
    r.lodl_fit_seconds = j.value("lodl_fit_seconds", 0.0);
    for (const json& e : j.at("epochs")) {
      EpochRecord rec;
      rec.epoch = e.at("epoch").get<int>();
      rec.phase = e.at("phase").get<std::string>();
      rec.loss_kind = e.at("loss_kind").get<std::string>();
      rec.train_loss = number_or_nan(e, "train_loss");
      rec.val_metric = number_or_nan(e, "val_metric");
      rec.train_seconds = e.value("train_seconds", 0.0);
      rec.val_seconds = e.value("val_seconds", 0.0);
      r.epochs.push_back(std::move(rec));
    }
    r.model = j.value("model", json());
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("run report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Runs.

PreparedRun prepare_run(const RunConfig& config) {
  config.validate();
  PreparedRun p;
  p.data = make_dataset(config);
  if (p.data.train.size() < 2) {
    throw EmptyDatasetError("need at least two training instances to split off "
                            "validation");
  }
  if (p.data.test.empty()) throw EmptyDatasetError("the test split is empty");
  p.output_width = output_width_for(p.data);
  if (!config.external_solver.empty()) {
    p.solver.external = std::make_shared<ExternalProcessSolver>(config.external_solver);
  }
  check_compatible(config, p);

  std::vector<std::size_t> idx(p.data.train.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 split_rng(mix(config.seed ^ 0x73706c6974ULL));
  std::shuffle(idx.begin(), idx.end(), split_rng);
  const std::size_t n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.validation_fraction *
                                            static_cast<double>(idx.size()))),
      1, idx.size() - 1);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (k < idx.size() - n_val ? p.train : p.validation).push_back(p.data.train[idx[k]]);
  }

  const ProblemSpec& spec = p.data.spec;
  p.train_opt = solve_all(spec, p.train, p.solver);
  p.val_opt = solve_all(spec, p.validation, p.solver);
  p.test_opt = solve_all(spec, p.data.test, p.solver);

  const Method m = config.loss.method;
  if (category(m) == MethodCategory::kStatistical) {
    std::vector<std::vector<double>> optima;
    for (const Solution& s : p.train_opt) optima.push_back(s.z);
    p.cache = build_solution_cache(optima, spec);
  }
  if (m == Method::kLodl) {
    const auto t0 = Clock::now();
    p.lodl = lodl_fit(p.train, spec, config.loss, mix(config.seed ^ 0x6c6f646cULL),
                      p.solver);
    p.lodl_fit_seconds = seconds_since(t0);
  }
  return p;
}

RunReport train_prepared(const RunConfig& config, const PreparedRun& prepared,
                         double learning_rate) {
  Trainer trainer(config, prepared, learning_rate);
  return trainer.run();
}

RunReport run_training(const RunConfig& config) {
  const PreparedRun p = prepare_run(config);
  return train_prepared(config, p, config.learning_rate);
}

TestEvaluation evaluate_model(const MlpModel& model, const Dataset& data,
                              const SolverOptions& solver) {
  const std::vector<Solution> optima = solve_all(data.spec, data.test, solver);
  const SplitScore s = score_split(data.spec, data.test, optima, model, solver);
  return {s.relative_regret, s.uplift, s.expected_uplift};
}

int worker_count() {
  const char* env = std::getenv("PNOBENCH_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) {
    throw ConfigError(std::string("PNOBENCH_WORKERS must be a positive integer, got '") +
                      env + "'");
  }
  return static_cast<int>(v);
}

GridResult grid_search(const RunConfig& config) {
  if (config.lr_grid.empty()) throw ConfigError("lr_grid is empty");
  const PreparedRun prepared = prepare_run(config);
  const std::size_t n = config.lr_grid.size();
  GridResult out;
  out.runs.resize(n);
  out.errors.resize(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < n; k = next++) {
      RunConfig cell = config;
      cell.learning_rate = config.lr_grid[k];
      try {
        out.runs[k] = train_prepared(cell, prepared, cell.learning_rate);
      } catch (const std::exception& e) {
        RunReport failed;
        failed.run_id = config.effective_run_id();
        failed.problem = config.problem;
        failed.method = to_string(config.loss.method);
        failed.seed = config.seed;
        failed.learning_rate = cell.learning_rate;
        failed.pretrain_epochs = config.pretrain_epochs;
        failed.best_val_metric = kNaN;
        failed.test_relative_regret = kNaN;
        out.runs[k] = std::move(failed);
        out.errors[k] = e.what();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  const bool by_uplift = uses_uplift(prepared.data.spec);
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < n; ++k) {
    if (!out.errors[k].empty() || !std::isfinite(out.runs[k].best_val_metric)) continue;
    const double v = out.runs[k].best_val_metric;
    if (!best || (by_uplift ? v > out.runs[*best].best_val_metric
                            : v < out.runs[*best].best_val_metric)) {
      best = k;
    }
  }
  if (!best) {
    std::string msg = "every grid run failed:";
    for (std::size_t k = 0; k < n; ++k) {
      msg += " [lr " + format_value(config.lr_grid[k]) + "] " +
             (out.errors[k].empty() ? "no finite validation metric" : out.errors[k]);
    }
    throw Error("grid_failed", msg);
  }
  out.best = out.runs[*best];
  return out;
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "capacity") return SweepAxis::kCapacity;
  if (s == "variable_size") return SweepAxis::kVariableSize;
  if (s == "generalization_capacity") return SweepAxis::kGeneralizationCapacity;
  throw ConfigError("unknown sweep axis '" + s + "'");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kCapacity: return "capacity";
    case SweepAxis::kVariableSize: return "variable_size";
    case SweepAxis::kGeneralizationCapacity: return "generalization_capacity";
  }
  return "?";
}

std::vector<RunReport> sweep(const RunConfig& base, SweepAxis axis,
                             const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (axis != SweepAxis::kVariableSize && base.problem != "knapsack_gen") {
    throw ConfigError(std::string("sweep axis ") + to_string(axis) +
                      " only applies to knapsack_gen");
  }
  std::vector<RunReport> out;
  if (axis != SweepAxis::kGeneralizationCapacity) {
    for (double v : values) out.push_back(grid_search(sweep_cell(base, axis, v)).best);
    return out;
  }

  RunConfig train_cfg = sweep_cell(base, SweepAxis::kCapacity, values.front());
  const RunReport trained = grid_search(train_cfg).best;
  const MlpModel model = MlpModel::from_json(trained.model);
  SolverOptions solver;
  if (!base.external_solver.empty()) {
    solver.external = std::make_shared<ExternalProcessSolver>(base.external_solver);
  }
  for (double v : values) {
    const RunConfig eval_cfg = sweep_cell(base, SweepAxis::kCapacity, v);
    const Dataset data = make_dataset(eval_cfg);
    const auto t0 = Clock::now();
    const TestEvaluation e = evaluate_model(model, data, solver);
    RunReport r = trained;
    r.run_id = base.effective_run_id() + "_train" + format_value(values.front()) +
               "_test" + format_value(v);
    r.test_relative_regret = e.relative_regret;
    r.test_uplift = e.uplift;
    r.test_expected_uplift = e.expected_uplift;
    r.test_seconds = seconds_since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  throw ConfigError("unknown report format '" + s + "'");
}

void emit_report(const std::vector<RunReport>& reports, const std::string& dir,
                 ReportFormat format) {
  if (reports.empty()) throw ConfigError("emit_report: no reports");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());

  std::vector<json> summary, curves;
  std::vector<MetricRecord> records;
  for (const RunReport& r : reports) {
    summary.push_back(summary_row(r));
    for (const EpochRecord& e : r.epochs) {
      curves.push_back(curve_row(r, e));
      records.push_back({r.run_id, e.epoch, "train", "loss", e.train_loss});
      records.push_back({r.run_id, e.epoch, "validation", r.selection_metric,
                         e.val_metric});
    }
    records.push_back({r.run_id, r.selected_epoch, "test", "relative_regret",
                       r.test_relative_regret});
    if (r.test_uplift) {
      records.push_back({r.run_id, r.selected_epoch, "test", "uplift", *r.test_uplift});
    }
    if (r.test_expected_uplift) {
      records.push_back({r.run_id, r.selected_epoch, "test", "expected_uplift",
                         *r.test_expected_uplift});
    }
  }

  const fs::path root(dir);
  if (format == ReportFormat::kCsv) {
    write_csv((root / "summary.csv").string(), to_table(summary, summary_columns()));
    write_csv((root / "curves.csv").string(), to_table(curves, curve_columns()));
    return;
  }
  json summary_json = {{"columns", summary_columns()}, {"rows", json::array()}};
  for (const json& row : summary) {
    summary_json["rows"].push_back(to_ordered_object(row, summary_columns()));
  }
  json curves_json = {{"columns", curve_columns()}, {"rows", json::array()}};
  for (const json& row : curves) {
    curves_json["rows"].push_back(to_ordered_object(row, curve_columns()));
  }
  write_text(root / "summary.json", summary_json.dump(2) + "\n");
  write_text(root / "curves.json", curves_json.dump(2) + "\n");
  std::string lines;
  for (const MetricRecord& m : records) {
    json rec = m.to_json();
    if (!std::isfinite(m.value)) rec["value"] = nullptr;
    lines += rec.dump() + "\n";
  }
  write_text(root / "records.jsonl", lines);
}

}  // namespace pno
