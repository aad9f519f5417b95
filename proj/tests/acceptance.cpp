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

// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any selected criterion fails.
//
//   acceptance                 all criteria
//   acceptance --criteria 1,7  a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pno/error.hpp"
#include "pno/finite_difference.hpp"
#include "pno/harness.hpp"
#include "pno/losses.hpp"
#include "pno/metrics.hpp"
#include "pno/solvers.hpp"

namespace {

using pno::ProblemSpec;
using pno::Tensor;
using Vec = std::vector<double>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0,
                double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

Vec uniform_vec(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::size_t uniform_int(std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

ProblemSpec random_knapsack(std::size_t n, std::mt19937_64& rng,
                            pno::Sense sense = pno::Sense::kMaximize) {
  Vec w(n);
  const bool integral = rng() % 2;
  for (double& v : w) {
    v = integral ? static_cast<double>(uniform_int(1, 10, rng)) : uniform_vec(1, 0.5, 10.0, rng)[0];
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  return pno::make_knapsack(w, uniform_vec(1, 0.2, 0.7, rng)[0] * total, sense);
}

ProblemSpec random_advertising(std::size_t users, std::mt19937_64& rng) {
  const std::size_t strategies = uniform_int(2, 4, rng);
  Vec costs(strategies, 0.0);
  for (std::size_t s = 1; s < strategies; ++s) costs[s] = 0.5 * uniform_int(1, 4, rng);
  return pno::make_advertising(users, costs, uniform_vec(1, 0.0, 3.0, rng)[0]);
}

Tensor random_psd(std::size_t n, std::mt19937_64& rng) {
  const Vec a = uniform_vec(n * n, -1.0, 1.0, rng);
  Tensor q(pno::Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = i == j ? 0.05 : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a[i * n + k] * a[j * n + k];
      q.at(i, j) = s / n;
    }
  }
  return q;
}

ProblemSpec small_scheduling(std::mt19937_64& rng) {
  ProblemSpec s;
  s.kind = pno::ProblemKind::kScheduling;
  s.sense = pno::Sense::kMinimize;
  s.machines = 1;
  s.resources = 1;
  s.timeslots = 48;
  s.machine_capacity = Tensor(pno::Shape{1, 1}, 1.0);
  const int start = static_cast<int>(uniform_int(0, 30, rng));
  s.jobs = {pno::Job{0, 48, static_cast<int>(uniform_int(1, 4, rng)), 1.0, {0.6}},
            pno::Job{start, start + 12, static_cast<int>(uniform_int(1, 4, rng)), 0.5, {0.6}}};
  return s;
}

bool same_decision(const ProblemSpec& spec, const pno::Solution& a, const pno::Solution& b,
                   std::span<const double> y) {
  if (a.z == b.z) return true;
  // Ties: distinct optimal decisions with identical objective value.
  const double fa = pno::decision_quality(spec, a.z, y), fb = pno::decision_quality(spec, b.z, y);
  return std::abs(fa - fb) <= 1e-12 * std::max(1.0, std::abs(fb));
}

// --- 1: autodiff through the predictor versus finite differences ------------

enum class DiffLoss { kNce, kPointwise, kPairwise, kListwise, kLodl, kQptl };
constexpr const char* kDiffLossNames[] = {"nce", "pointwise", "pairwise",
                                          "listwise", "lodl", "qptl"};

Outcome criterion_autodiff() {
  std::mt19937_64 rng(101);
  constexpr std::size_t kItems = 8, kFeatures = 3;
  double worst = 0.0;
  std::map<std::string, double> worst_by_loss;
  int models = 0, boundary_skips = 0;
  while (models < 100) {
    const auto loss = static_cast<DiffLoss>(models % 6);
    const ProblemSpec spec =
        models % 12 < 6 ? random_knapsack(kItems, rng) : pno::make_topk(kItems, 3);
    std::vector<std::size_t> widths = {kFeatures, uniform_int(4, 10, rng)};
    if (rng() % 2) widths.push_back(uniform_int(3, 8, rng));
    widths.push_back(1);
    pno::MlpModel model(widths, pno::OutputHead::kIdentity, rng());
    for (std::size_t l = 1; l < model.parameters().size(); l += 2) {
      for (double& v : model.parameters()[l].values()) v = uniform_vec(1, 0.0, 0.3, rng)[0];
    }
    const Tensor x(pno::Shape{kItems, kFeatures}, uniform_vec(kItems * kFeatures, -1, 1, rng));
    const Vec y = uniform_vec(kItems, 0.1, 1.0, rng);

    pno::LossConfig cfg;
    cfg.temperature = 0.5;
    cfg.lodl_samples = 200;
    pno::SolutionCache cache(kItems);
    cache.add(pno::solve(spec, y).z, pno::CacheOrigin::kInstanceOptimum);
    for (int k = 0; k < 8; ++k) {
      cache.add(pno::solve(spec, uniform_vec(kItems, 0, 1, rng)).z,
                pno::CacheOrigin::kInstanceOptimum);
    }
    pno::LodlSurrogate surrogate;
    if (loss == DiffLoss::kLodl) {
      // Wide enough sampling that some draws change the decision.
      cfg.lodl_noise = 0.3;
      for (int attempt = 0; attempt < 20 && (attempt == 0 || surrogate.degenerate); ++attempt) {
        surrogate = pno::lodl_fit_instance(spec, y, cfg, rng);
      }
      if (surrogate.degenerate) continue;
    }
    const Vec probe = uniform_vec(kItems, -1.0, 1.0, rng);

    // Loss value and dL/dy_hat at a prediction.
    auto evaluate = [&](const Vec& y_hat) -> pno::LossAndGrad {
      switch (loss) {
        case DiffLoss::kNce:
          return pno::statistical_loss(pno::StatVariant::kNce, spec, y_hat, y, cache, cfg);
        case DiffLoss::kPointwise:
          return pno::statistical_loss(pno::StatVariant::kPointwise, spec, y_hat, y, cache, cfg);
        case DiffLoss::kPairwise:
          return pno::statistical_loss(pno::StatVariant::kPairwise, spec, y_hat, y, cache, cfg);
        case DiffLoss::kListwise:
          return pno::statistical_loss(pno::StatVariant::kListwise, spec, y_hat, y, cache, cfg);
        case DiffLoss::kLodl:
          return pno::lodl_loss(surrogate, y_hat, y);
        case DiffLoss::kQptl: {
          const pno::QptlResult fwd = pno::qptl_forward(spec, y_hat, cfg.qp_gamma);
          pno::LossAndGrad r;
          for (std::size_t i = 0; i < kItems; ++i) r.loss += probe[i] * fwd.z[i];
          r.grad = pno::qptl_backward(spec, fwd, probe);
          return r;
        }
      }
      return {};
    };

    pno::Graph graph;
    const pno::NodeId out = model.build(graph, graph.input("x"));
    graph.set_root(out);
    const pno::NamedTensors inputs = model.bind(x);
    const Vec y_hat = graph.forward(inputs).values();
    if (loss == DiffLoss::kQptl) {
      const Vec z = pno::qptl_forward(spec, y_hat, cfg.qp_gamma).z;
      const bool near = std::any_of(z.begin(), z.end(), [](double v) {
        return (v > 1e-9 && v < 1e-4) || (v < 1 - 1e-9 && v > 1 - 1e-4);
      });
      if (near) {
        ++boundary_skips;
        continue;
      }
    }
    const pno::LossAndGrad at = evaluate(y_hat);
    const pno::NamedTensors grads = graph.backward(Tensor(pno::Shape{kItems, 1}, at.grad));
    for (std::size_t p = 0; p < model.parameters().size(); ++p) {
      const std::string& name = model.parameter_names()[p];
      auto objective = [&](const Tensor& w) {
        pno::NamedTensors moved = inputs;
        moved.at(name) = w;
        return evaluate(graph.forward(moved).values()).loss;
      };
      const Tensor numeric = pno::finite_difference_gradient(objective, model.parameters()[p]);
      const double err = pno::max_relative_error(grads.at(name), numeric);
      worst = std::max(worst, err);
      double& slot = worst_by_loss[kDiffLossNames[static_cast<int>(loss)]];
      slot = std::max(slot, err);
    }
    ++models;
  }
  std::string detail = fmt("100 MLPs, max relative error %.3g (< 1e-4);", worst);
  for (const auto& [name, err] : worst_by_loss) detail += " " + name + fmt(" %.2g", err);
  detail += fmt("; %g qptl draws near an active-set boundary redrawn", boundary_skips);
  return {worst < 1e-4, detail};
}

// --- 2: exact solvers versus enumeration ------------------------------------

Outcome criterion_solver_oracles() {
  std::mt19937_64 rng(102);
  std::map<std::string, int> mismatches;
  for (int t = 0; t < 200; ++t) {
    {
      const ProblemSpec spec = random_knapsack(uniform_int(1, 15, rng), rng);
      const Vec y = uniform_vec(spec.coefficient_size(), 0.0, 10.0, rng);
      if (!same_decision(spec, pno::solve_knapsack(spec, y), pno::brute_force(spec, y), y)) {
        ++mismatches["knapsack"];
      }
    }
    {
      const ProblemSpec spec = pno::make_matching(uniform_int(1, 7, rng));
      const Vec y = uniform_vec(spec.coefficient_size(), -1.0, 1.0, rng);
      if (!same_decision(spec, pno::solve_matching(spec, y), pno::brute_force(spec, y), y)) {
        ++mismatches["matching"];
      }
    }
    {
      const std::size_t websites = uniform_int(1, 10, rng);
      const ProblemSpec spec = pno::make_budget_allocation(
          websites, uniform_int(1, 6, rng), uniform_int(1, std::min<std::size_t>(3, websites), rng));
      const Vec y = uniform_vec(spec.coefficient_size(), 0.0, 1.0, rng);
      if (!same_decision(spec, pno::solve_budget_allocation(spec, y),
                         pno::brute_force(spec, y), y)) {
        ++mismatches["budget_allocation"];
      }
    }
    {
      const ProblemSpec spec = random_advertising(uniform_int(1, 3, rng), rng);
      const Vec y = uniform_vec(spec.coefficient_size(), 0.0, 1.0, rng);
      if (!same_decision(spec, pno::solve_advertising(spec, y), pno::brute_force(spec, y), y)) {
        ++mismatches["advertising"];
      }
    }
  }
  int total = 0;
  std::string detail = "200 instances per solver, mismatches:";
  for (const char* k : {"knapsack", "matching", "budget_allocation", "advertising"}) {
    detail += std::string(" ") + k + fmt(" %g", mismatches[k]);
    total += mismatches[k];
  }
  return {total == 0, detail};
}

// --- 3: zero regret at the truth and positive-scaling invariance --------------

Outcome criterion_zero_regret() {
  std::mt19937_64 rng(103);
  pno::SolverOptions external;
  external.external = std::make_shared<pno::ExternalProcessSolver>(PNO_TOY_SOLVER);
  double worst = 0.0;
  int kinds = 0;
  const std::vector<std::function<ProblemSpec()>> makers = {
      [&] { return random_knapsack(uniform_int(2, 15, rng), rng); },
      [&] { return pno::make_topk(10, uniform_int(1, 9, rng)); },
      [&] { return pno::make_budget_allocation(uniform_int(2, 8, rng), 5, 2); },
      [&] { return pno::make_matching(uniform_int(2, 6, rng)); },
      [&] { return pno::make_portfolio(random_psd(uniform_int(2, 8, rng), rng)); },
      [&] { return random_advertising(uniform_int(1, 20, rng), rng); },
      [&] { return small_scheduling(rng); }};
  for (const auto& make : makers) {
    ++kinds;
    for (int t = 0; t < 100; ++t) {
      const ProblemSpec spec = make();
      const Vec y = uniform_vec(spec.coefficient_size(), 0.0, 1.0, rng);
      const auto& opts =
          spec.kind == pno::ProblemKind::kScheduling ? external : pno::SolverOptions{};
      worst = std::max(worst, pno::regret(spec, y, y, opts));
    }
  }
  int scaling_failures = 0;
  for (int t = 0; t < 400; ++t) {
    ProblemSpec spec;
    switch (t % 4) {
      case 0: spec = random_knapsack(uniform_int(2, 15, rng), rng); break;
      case 1: spec = pno::make_topk(10, uniform_int(1, 9, rng)); break;
      case 2: spec = pno::make_matching(uniform_int(2, 6, rng)); break;
      default: spec = random_advertising(uniform_int(1, 20, rng), rng);
    }
    const Vec y = uniform_vec(spec.coefficient_size(), 0.0, 1.0, rng);
    const double alpha = std::exp(uniform_vec(1, -5.0, 5.0, rng)[0]);
    Vec scaled = y;
    for (double& v : scaled) v *= alpha;
    if (pno::solve(spec, scaled).z != pno::solve(spec, y).z) ++scaling_failures;
  }
  return {worst == 0.0 && scaling_failures == 0,
          fmt("%g kinds x 100, max regret(y, y) = %g; %g/400 scaled bilinear instances "
              "changed decision",
              kinds, worst, scaling_failures)};
}

// --- 4: SPO+ upper-bounds regret ------------------------------------------------

Outcome criterion_spo_dominance() {
  std::mt19937_64 rng(104);
  int violations = 0;
  double worst_at_truth = 0.0, min_gap = INFINITY;
  for (int t = 0; t < 1000; ++t) {
    ProblemSpec spec;
    switch (t % 3) {
      case 0: spec = random_knapsack(uniform_int(2, 8, rng), rng, pno::Sense::kMinimize); break;
      case 1: spec = pno::make_topk(8, uniform_int(1, 7, rng), pno::Sense::kMinimize); break;
      default: spec = pno::make_matching(uniform_int(2, 4, rng), pno::Sense::kMinimize);
    }
    const std::size_t n = spec.coefficient_size();
    const Vec y = uniform_vec(n, -1.0, 1.0, rng), y_hat = uniform_vec(n, -1.0, 1.0, rng);
    const double loss = pno::spo_plus_loss(spec, y_hat, y).loss;
    const double r = pno::regret(spec, y_hat, y);
    const double tol = 1e-9 * std::max(1.0, std::abs(loss));
    if (r < 0.0 || loss + tol < r) ++violations;
    min_gap = std::min(min_gap, loss - r);
    worst_at_truth = std::max(worst_at_truth, std::abs(pno::spo_plus_loss(spec, y, y).loss));
  }
  return {violations == 0 && worst_at_truth <= 1e-12,
          fmt("1000 minimize instances, %g violations of loss >= regret >= 0 (min gap %.3g); "
              "max |loss(y, y)| = %g",
              violations, min_gap, worst_at_truth)};
}

// --- 5: gradient-interpolation and ranking-loss identities -------------------------

Outcome criterion_identities() {
  std::mt19937_64 rng(105);
  int identity_mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const ProblemSpec spec = random_knapsack(uniform_int(2, 10, rng), rng, pno::Sense::kMinimize);
    const std::size_t n = spec.coefficient_size();
    const Vec y_hat = uniform_vec(n, -1, 1, rng), g = uniform_vec(n, -1, 1, rng);
    const Vec y = uniform_vec(n, -1, 1, rng);
    const Vec grad = pno::discrete_interp_gradient(pno::InterpVariant::kIdentity, spec, y_hat, g,
                                                   y, pno::LossConfig{}, rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (grad[i] != -g[i]) {
        ++identity_mismatches;
        break;
      }
    }
  }

  double pointwise_max = 0.0, listwise_max = 0.0, nce_max = 0.0, nce_min = 0.0;
  double nce_optimum_only = 0.0, shift_max = 0.0;
  const pno::LossConfig cfg;
  for (int t = 0; t < 200; ++t) {
    const ProblemSpec spec = t % 2 ? random_knapsack(8, rng) : pno::make_topk(8, 3);
    const Vec y = uniform_vec(8, 0.0, 1.0, rng);
    pno::SolutionCache cache(8), optimum_only(8);
    cache.add(pno::solve(spec, y).z, pno::CacheOrigin::kInstanceOptimum);
    optimum_only.add(pno::solve(spec, y).z, pno::CacheOrigin::kInstanceOptimum);
    for (int k = 0; k < 10; ++k) {
      cache.add(pno::solve(spec, uniform_vec(8, 0, 1, rng)).z, pno::CacheOrigin::kInstanceOptimum);
    }
    auto at_truth = [&](pno::StatVariant v, const pno::SolutionCache& c) {
      return pno::statistical_loss(v, spec, y, y, c, cfg).loss;
    };
    pointwise_max = std::max(pointwise_max, std::abs(at_truth(pno::StatVariant::kPointwise, cache)));
    listwise_max = std::max(listwise_max, std::abs(at_truth(pno::StatVariant::kListwise, cache)));
    const double nce = at_truth(pno::StatVariant::kNce, cache);
    nce_max = std::max(nce_max, std::abs(nce));
    nce_min = std::min(nce_min, nce);
    nce_optimum_only =
        std::max(nce_optimum_only, std::abs(at_truth(pno::StatVariant::kNce, optimum_only)));

    if (spec.kind == pno::ProblemKind::kTopK) {
      // Every top-k decision has k ones: adding c to all coefficients adds k c
      // to every cached objective value.
      const Vec y_hat = uniform_vec(8, 0.0, 1.0, rng);
      Vec moved = y_hat;
      const double c = uniform_vec(1, -50.0, 50.0, rng)[0];
      for (double& v : moved) v += c;
      shift_max = std::max(
          shift_max,
          std::abs(pno::statistical_loss(pno::StatVariant::kListwise, spec, y_hat, y, cache, cfg).loss -
                   pno::statistical_loss(pno::StatVariant::kListwise, spec, moved, y, cache, cfg).loss));
    }
  }
  const bool pass = identity_mismatches == 0 && pointwise_max <= 1e-12 && listwise_max <= 1e-12 &&
                    nce_max <= 1e-12 && shift_max <= 1e-10;
  std::string detail = fmt("identity != -dL/dz on %g/1000; at y_hat = y: |pointwise| <= %.2g, "
                           "|listwise| <= %.2g, ",
                           identity_mismatches, pointwise_max, listwise_max);
  detail += fmt("|nce| <= %.3g (min %.3g; %.2g with only z* cached); listwise shift gap %.2g",
                nce_max, nce_min, nce_optimum_only, shift_max);
  return {pass, detail};
}

// --- 6: relaxation bound -----------------------------------------------------------

Outcome criterion_relaxation() {
  std::mt19937_64 rng(106);
  int violations = 0;
  for (int t = 0; t < 500; ++t) {
    const ProblemSpec spec = random_knapsack(uniform_int(1, 15, rng), rng);
    const Vec y = uniform_vec(spec.coefficient_size(), 0.0, 10.0, rng);
    const double relaxed = *pno::solve_knapsack_relaxed(spec, y).objective;
    const double integral = *pno::solve_knapsack(spec, y).objective;
    if (relaxed + 1e-9 * std::max(1.0, integral) < integral) ++violations;
  }
  return {violations == 0, fmt("%g/500 instances with relaxed < integer optimum", violations)};
}

// --- benchmark criteria ----------------------------------------------------------------

constexpr int kSeeds = 5;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double mean(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double stdev(const Vec& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.size() > 1 ? std::sqrt(s / (v.size() - 1)) : 0.0;
}

std::string list(const Vec& v, const char* format = "%.3f") {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + fmt(format, x);
  return out;
}

// Full protocol: learning-rate grid, early stopping, best-validation checkpoint.
pno::RunReport protocol_run(const std::string& problem, pno::Method method, std::uint64_t seed,
                            const nlohmann::json& data = nlohmann::json::object(),
                            int pretrain_epochs = 0) {
  pno::RunConfig c = pno::default_run_config(problem, method);
  c.seed = seed;
  c.data = data;
  c.pretrain_epochs = pretrain_epochs;
  if (problem == "advertising") c.uplift_mode = "expected";
  return pno::grid_search(c).best;
}

Vec test_regrets(const std::string& problem, pno::Method method,
                 const nlohmann::json& data = nlohmann::json::object(), int pretrain = 0) {
  Vec out;
  for (int s = 0; s < kSeeds; ++s) {
    out.push_back(protocol_run(problem, method, s, data, pretrain).test_relative_regret);
  }
  return out;
}

Outcome criterion_knapsack_gen() {
  const auto start = std::chrono::steady_clock::now();
  const Vec two_stage = test_regrets("knapsack_gen", pno::Method::kTwoStage);
  const Vec spo = test_regrets("knapsack_gen", pno::Method::kSpoPlus);
  const Vec listwise = test_regrets("knapsack_gen", pno::Method::kLtrListwise);
  const double minutes = seconds_since(start) / 60.0;
  const double ts = mean(two_stage);
  const bool band = ts >= 3.0 && ts <= 12.0;
  const bool spo_ok = mean(spo) <= ts + 0.5;
  const bool listwise_ok = mean(listwise) <= ts + 0.5;
  std::string detail = fmt("two_stage %.3f +- %.3f %% [3, 12] ", ts, stdev(two_stage)) +
                       (band ? "in band" : "OUT OF BAND");
  detail += fmt("; spo_plus %.3f +- %.3f %% (<= %.3f)", mean(spo), stdev(spo), ts + 0.5);
  detail += fmt("; ltr_listwise %.3f +- %.3f %% (<= %.3f)", mean(listwise), stdev(listwise),
                ts + 0.5);
  detail += fmt("; %.1f min (< 30)", minutes);
  detail += "; per seed two_stage [" + list(two_stage) + "] spo_plus [" + list(spo) +
            "] ltr_listwise [" + list(listwise) + "]";
  return {band && spo_ok && listwise_ok && minutes < 30.0, detail};
}

Outcome criterion_cubic() {
  const auto start = std::chrono::steady_clock::now();
  const Vec r = test_regrets("cubic_topk", pno::Method::kTwoStage);
  const double minutes = seconds_since(start) / 60.0;
  const double worst = *std::max_element(r.begin(), r.end());
  return {worst < 1.0 && minutes < 5.0,
          fmt("two_stage %.3f +- %.3f %%, worst seed %.3f %% (< 1); %.1f min (< 5)", mean(r),
              stdev(r), worst, minutes) +
              "; per seed [" + list(r) + "]"};
}

Outcome criterion_capacity_sweep() {
  bool pass = true;
  std::string detail;
  for (int s = 0; s < kSeeds; ++s) {
    Vec r;
    for (double capacity : {30.0, 60.0, 90.0}) {
      r.push_back(protocol_run("knapsack_gen", pno::Method::kTwoStage, s,
                               {{"capacity", capacity}})
                      .test_relative_regret);
    }
    const bool decreasing = r[0] > r[1] && r[1] > r[2];
    pass = pass && decreasing;
    detail += std::string(s ? "; " : "") + fmt("seed %g: ", s) + list(r) +
              (decreasing ? "" : " NOT DECREASING");
  }
  return {pass, "two_stage at capacity 30/60/90, " + detail};
}

Outcome criterion_fine_tuning() {
  const Vec scratch = test_regrets("knapsack_gen", pno::Method::kBlackbox);
  const Vec tuned = test_regrets("knapsack_gen", pno::Method::kBlackbox, nlohmann::json::object(), 150);
  return {mean(tuned) <= mean(scratch),
          fmt("blackbox after 150 pretraining epochs %.3f +- %.3f %% vs from scratch %.3f +- "
              "%.3f %%",
              mean(tuned), stdev(tuned), mean(scratch), stdev(scratch)) +
              "; per seed [" + list(tuned) + "] vs [" + list(scratch) + "]"};
}

Outcome criterion_advertising() {
  Vec identity, two_stage;
  for (int s = 0; s < kSeeds; ++s) {
    identity.push_back(*protocol_run("advertising", pno::Method::kIdentity, s).test_expected_uplift);
    two_stage.push_back(
        *protocol_run("advertising", pno::Method::kTwoStage, s).test_expected_uplift);
  }
  return {mean(identity) >= mean(two_stage) - 0.01,
          fmt("expected uplift identity %.4f +- %.4f vs two_stage %.4f +- %.4f (>= two_stage - "
              "0.01)",
              mean(identity), stdev(identity), mean(two_stage), stdev(two_stage)) +
              "; per seed [" + list(identity, "%.4f") + "] vs [" + list(two_stage, "%.4f") + "]"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria", "acceptance"};
  std::vector<int> selected;
  app.add_option("--criteria", selected, "Criterion numbers to run (default: all)")
      ->delimiter(',')
      ->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    selected.resize(11);
    std::iota(selected.begin(), selected.end(), 1);
  }

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"autodiff vs finite differences", criterion_autodiff}},
      {2, {"solver oracle equivalence", criterion_solver_oracles}},
      {3, {"zero regret and scaling invariance", criterion_zero_regret}},
      {4, {"SPO+ dominance", criterion_spo_dominance}},
      {5, {"interpolation and ranking identities", criterion_identities}},
      {6, {"relaxation bound", criterion_relaxation}},
      {7, {"knapsack-gen benchmark", criterion_knapsack_gen}},
      {8, {"cubic top-k benchmark", criterion_cubic}},
      {9, {"capacity sweep direction", criterion_capacity_sweep}},
      {10, {"fine-tuning benefit", criterion_fine_tuning}},
      {11, {"advertising uplift", criterion_advertising}}};

  int failures = 0;
  for (int k : std::set<int>(selected.begin(), selected.end())) {
    const auto& [title, run] = criteria.at(k);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("CRITERION %d %s | %s | %s [%.1fs]\n", k, o.pass ? "PASS" : "FAIL", title,
                o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
