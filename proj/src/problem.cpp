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

#include "pno/problem.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pno/error.hpp"

namespace pno {

namespace {

constexpr double kTol = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kKnapsack: return "knapsack";
    case ProblemKind::kTopK: return "topk";
    case ProblemKind::kBudgetAllocation: return "budget_alloc";
    case ProblemKind::kMatching: return "matching";
    case ProblemKind::kPortfolio: return "portfolio";
    case ProblemKind::kAdvertising: return "advertising";
    case ProblemKind::kScheduling: return "scheduling";
  }
  return "?";
}

const char* to_string(Sense sense) {
  return sense == Sense::kMinimize ? "minimize" : "maximize";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  for (auto k : {ProblemKind::kKnapsack, ProblemKind::kTopK,
                 ProblemKind::kBudgetAllocation, ProblemKind::kMatching,
                 ProblemKind::kPortfolio, ProblemKind::kAdvertising,
                 ProblemKind::kScheduling}) {
    if (s == to_string(k)) return k;
  }
  throw ParameterError("unknown problem kind '" + s + "'");
}

Sense sense_from_string(const std::string& s) {
  if (s == "maximize") return Sense::kMaximize;
  if (s == "minimize") return Sense::kMinimize;
  throw ParameterError("unknown sense '" + s + "'");
}

std::size_t ProblemSpec::coefficient_size() const {
  switch (kind) {
    case ProblemKind::kKnapsack: return weights.size();
    case ProblemKind::kTopK: return items;
    case ProblemKind::kBudgetAllocation: return websites * users;
    case ProblemKind::kMatching: return side * side;
    case ProblemKind::kPortfolio: return covariance.rows();
    case ProblemKind::kAdvertising: return users * strategy_costs.size();
    case ProblemKind::kScheduling: return timeslots;
  }
  return 0;
}

std::size_t ProblemSpec::decision_size() const {
  switch (kind) {
    case ProblemKind::kBudgetAllocation: return websites;
    case ProblemKind::kScheduling: return jobs.size() * machines * timeslots;
    default: return coefficient_size();
  }
}

bool ProblemSpec::bilinear() const {
  return kind == ProblemKind::kKnapsack || kind == ProblemKind::kTopK ||
         kind == ProblemKind::kMatching || kind == ProblemKind::kAdvertising;
}

void ProblemSpec::validate() const {
  auto fail = [&](const std::string& msg) {
    throw ParameterError(std::string(to_string(kind)) + ": " + msg);
  };
  switch (kind) {
    case ProblemKind::kKnapsack:
      if (capacity < 0.0) fail("negative capacity " + fmt(capacity));
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) fail("weight " + std::to_string(i) + " is negative");
      }
      break;
    case ProblemKind::kTopK:
      if (k > items) fail("k exceeds the number of items");
      break;
    case ProblemKind::kBudgetAllocation:
      if (sense != Sense::kMaximize) fail("only the maximize sense is defined");
      if (budget > websites) fail("budget exceeds the number of websites");
      if (users == 0) fail("needs at least one user");
      break;
    case ProblemKind::kMatching:
      break;
    case ProblemKind::kPortfolio: {
      if (sense != Sense::kMaximize) fail("only the maximize sense is defined");
      if (covariance.rank() != 2 || covariance.rows() != covariance.cols()) {
        fail("covariance must be square");
      }
      if (risk_aversion < 0.0) fail("negative risk aversion");
      const std::size_t n = covariance.rows();
      Eigen::MatrixXd q(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (std::abs(covariance.at(i, j) - covariance.at(j, i)) > 1e-10) {
            fail("covariance is not symmetric");
          }
          q(i, j) = covariance.at(i, j);
        }
      }
      if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8) {
          fail("covariance is not PSD (smallest eigenvalue " +
               fmt(es.eigenvalues().minCoeff()) + ")");
        }
      }
      break;
    }
    case ProblemKind::kAdvertising:
      if (strategy_costs.empty()) fail("needs at least one strategy");
      for (double c : strategy_costs) {
        if (c < 0.0) fail("negative strategy cost");
      }
      if (total_budget < 0.0) fail("negative budget " + fmt(total_budget));
      break;
    case ProblemKind::kScheduling:
      if (sense != Sense::kMinimize) fail("only the minimize sense is defined");
      if (machine_capacity.rank() != 2 || machine_capacity.rows() != machines ||
          machine_capacity.cols() != resources) {
        fail("machine capacity must be machines x resources");
      }
      for (double c : machine_capacity.values()) {
        if (c < 0.0) fail("negative machine capacity");
      }
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        const Job& job = jobs[j];
        const std::string id = "job " + std::to_string(j);
        if (job.duration < 0) fail(id + " has negative duration");
        if (job.earliest_start < 0) fail(id + " has negative earliest start");
        if (job.earliest_start + job.duration > job.latest_end) {
          fail(id + " cannot fit in its window");
        }
        if (job.latest_end > static_cast<int>(timeslots)) {
          fail(id + " ends after the last timeslot");
        }
        if (job.resource_usage.size() != resources) {
          fail(id + " resource usage has wrong length");
        }
        for (double u : job.resource_usage) {
          if (u < 0.0) fail(id + " has negative resource usage");
        }
      }
      break;
  }
}

ProblemSpec make_knapsack(std::vector<double> weights, double capacity,
                          Sense sense) {
  ProblemSpec s;
  s.kind = ProblemKind::kKnapsack;
  s.sense = sense;
  s.weights = std::move(weights);
  s.capacity = capacity;
  return s;
}

ProblemSpec make_topk(std::size_t n, std::size_t k, Sense sense) {
  ProblemSpec s;
  s.kind = ProblemKind::kTopK;
  s.sense = sense;
  s.items = n;
  s.k = k;
  return s;
}

ProblemSpec make_budget_allocation(std::size_t websites, std::size_t users,
                                   std::size_t budget) {
  ProblemSpec s;
  s.kind = ProblemKind::kBudgetAllocation;
  s.websites = websites;
  s.users = users;
  s.budget = budget;
  return s;
}

ProblemSpec make_matching(std::size_t side, Sense sense) {
  ProblemSpec s;
  s.kind = ProblemKind::kMatching;
  s.sense = sense;
  s.side = side;
  return s;
}

ProblemSpec make_portfolio(Tensor covariance, double risk_aversion) {
  ProblemSpec s;
  s.kind = ProblemKind::kPortfolio;
  s.covariance = std::move(covariance);
  s.risk_aversion = risk_aversion;
  return s;
}

ProblemSpec make_advertising(std::size_t users,
                             std::vector<double> strategy_costs,
                             double total_budget, Sense sense) {
  ProblemSpec s;
  s.kind = ProblemKind::kAdvertising;
  s.sense = sense;
  s.users = users;
  s.strategy_costs = std::move(strategy_costs);
  s.total_budget = total_budget;
  return s;
}

FeasibilityReport check_feasible(const ProblemSpec& spec,
                                 std::span<const double> z, Domain domain) {
  FeasibilityReport rep;
  auto violate = [&](std::string msg) {
    rep.feasible = false;
    rep.violations.push_back(std::move(msg));
  };
  if (z.size() != spec.decision_size()) {
    violate("decision has " + std::to_string(z.size()) +
            " entries, expected " + std::to_string(spec.decision_size()));
    return rep;
  }
  const bool continuous =
      domain == Domain::kRelaxed || spec.kind == ProblemKind::kPortfolio;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double v = z[i];
    if (!std::isfinite(v)) {
      violate("entry " + std::to_string(i) + " is not finite");
    } else if (continuous) {
      if (v < -kTol || v > 1.0 + kTol) {
        violate("entry " + std::to_string(i) + " = " + fmt(v) +
                " outside [0,1]");
      }
    } else if (std::abs(v) > kTol && std::abs(v - 1.0) > kTol) {
      violate("entry " + std::to_string(i) + " = " + fmt(v) + " is not binary");
    }
  }

  switch (spec.kind) {
    case ProblemKind::kKnapsack: {
      double w = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) w += spec.weights[i] * z[i];
      if (w > spec.capacity + 1e-9 * std::max(1.0, spec.capacity)) {
        violate("capacity: weight " + fmt(w) + " > " + fmt(spec.capacity));
      }
      break;
    }
    case ProblemKind::kTopK: {
      double s = 0.0;
      for (double v : z) s += v;
      if (std::abs(s - static_cast<double>(spec.k)) > 1e-8) {
        violate("cardinality: selected " + fmt(s) + " != k = " +
                std::to_string(spec.k));
      }
      break;
    }
    case ProblemKind::kBudgetAllocation: {
      double s = 0.0;
      for (double v : z) s += v;
      if (s > static_cast<double>(spec.budget) + 1e-8) {
        violate("budget: selected " + fmt(s) + " > " +
                std::to_string(spec.budget));
      }
      break;
    }
    case ProblemKind::kMatching: {
      const std::size_t n = spec.side;
      for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0, c = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          r += z[i * n + j];
          c += z[j * n + i];
        }
        if (std::abs(r - 1.0) > 1e-8) {
          violate("row " + std::to_string(i) + " sums to " + fmt(r));
        }
        if (std::abs(c - 1.0) > 1e-8) {
          violate("column " + std::to_string(i) + " sums to " + fmt(c));
        }
      }
      break;
    }
    case ProblemKind::kPortfolio: {
      double s = 0.0;
      for (double v : z) s += v;
      if (std::abs(s - 1.0) > 1e-8) violate("simplex: weights sum to " + fmt(s));
      break;
    }
    case ProblemKind::kAdvertising: {
      const std::size_t S = spec.strategy_costs.size();
      double spend = 0.0;
      for (std::size_t i = 0; i < spec.users; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < S; ++j) {
          s += z[i * S + j];
          spend += spec.strategy_costs[j] * z[i * S + j];
        }
        if (s > 1.0 + 1e-9) {
          violate("user " + std::to_string(i) + " gets " + fmt(s) +
                  " strategies");
        }
      }
      if (spend > spec.total_budget + 1e-9 * std::max(1.0, spec.total_budget)) {
        violate("budget: spend " + fmt(spend) + " > " + fmt(spec.total_budget));
      }
      break;
    }
    case ProblemKind::kScheduling: {
      const std::size_t M = spec.machines, T = spec.timeslots;
      const auto idx = [&](std::size_t j, std::size_t m, std::size_t t) {
        return (j * M + m) * T + t;
      };
      for (std::size_t j = 0; j < spec.jobs.size(); ++j) {
        const Job& job = spec.jobs[j];
        double starts = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
          for (std::size_t t = 0; t < T; ++t) {
            const double v = z[idx(j, m, t)];
            starts += v;
            if (std::abs(v) <= kTol) continue;
            if (static_cast<int>(t) < job.earliest_start) {
              violate("time window: job " + std::to_string(j) +
                      " starts at " + std::to_string(t) +
                      " before earliest start " +
                      std::to_string(job.earliest_start));
            }
            if (static_cast<int>(t) + job.duration > job.latest_end) {
              violate("time window: job " + std::to_string(j) +
                      " starting at " + std::to_string(t) +
                      " ends after latest end " +
                      std::to_string(job.latest_end));
            }
          }
        }
        if (std::abs(starts - 1.0) > 1e-8) {
          violate("single start: job " + std::to_string(j) + " starts " +
                  fmt(starts) + " times");
        }
      }
      for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t r = 0; r < spec.resources; ++r) {
          for (std::size_t t = 0; t < T; ++t) {
            double load = 0.0;
            for (std::size_t j = 0; j < spec.jobs.size(); ++j) {
              const Job& job = spec.jobs[j];
              // running at t if started in (t - d_j, t]
              for (int s = static_cast<int>(t) - job.duration + 1;
                   s <= static_cast<int>(t); ++s) {
                if (s < 0) continue;
                load += z[idx(j, m, static_cast<std::size_t>(s))] *
                        job.resource_usage[r];
              }
            }
            const double cap = spec.machine_capacity.at(m, r);
            if (load > cap + 1e-9) {
              violate("capacity: machine " + std::to_string(m) +
                      " resource " + std::to_string(r) + " at t=" +
                      std::to_string(t) + " uses " + fmt(load) + " > " +
                      fmt(cap));
            }
          }
        }
      }
      break;
    }
  }
  return rep;
}

double objective_unchecked(const ProblemSpec& spec, std::span<const double> z,
                           std::span<const double> y) {
  if (y.size() != spec.coefficient_size()) {
    throw DimensionError(std::string("objective: ") + to_string(spec.kind) +
                         " expects " + std::to_string(spec.coefficient_size()) +
                         " coefficients, got " + std::to_string(y.size()));
  }
  if (z.size() != spec.decision_size()) {
    throw DimensionError(std::string("objective: ") + to_string(spec.kind) +
                         " expects a decision of size " +
                         std::to_string(spec.decision_size()) + ", got " +
                         std::to_string(z.size()));
  }
  if (spec.kind == ProblemKind::kBudgetAllocation) {
    const std::size_t M = spec.websites, N = spec.users;
    double reached = 0.0;
    for (std::size_t u = 0; u < N; ++u) {
      double miss = 1.0;
      for (std::size_t w = 0; w < M; ++w) miss *= 1.0 - z[w] * y[w * N + u];
      reached += 1.0 - miss;
    }
    return reached / static_cast<double>(N);
  }
  AffineForm form = affine_in_y(spec, z);
  double s = form.offset;
  for (std::size_t i = 0; i < y.size(); ++i) s += form.slope[i] * y[i];
  return s;
}

double objective(const ProblemSpec& spec, std::span<const double> z,
                 std::span<const double> y) {
  if (z.size() != spec.decision_size()) {
    throw DimensionError(std::string("objective: ") + to_string(spec.kind) +
                         " expects a decision of size " +
                         std::to_string(spec.decision_size()) + ", got " +
                         std::to_string(z.size()));
  }
  FeasibilityReport rep = check_feasible(spec, z, Domain::kRelaxed);
  if (!rep.feasible) {
    std::string msg = std::string("objective: infeasible ") +
                      to_string(spec.kind) + " decision:";
    for (const auto& v : rep.violations) msg += " [" + v + "]";
    throw FeasibilityError(msg);
  }
  return objective_unchecked(spec, z, y);
}

AffineForm affine_in_y(const ProblemSpec& spec, std::span<const double> z) {
  AffineForm form;
  switch (spec.kind) {
    case ProblemKind::kBudgetAllocation:
      throw UnsupportedError("budget allocation objective is not affine in y");
    case ProblemKind::kPortfolio: {
      form.slope.assign(z.begin(), z.end());
      const std::size_t n = z.size();
      double quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          quad += z[i] * spec.covariance.at(i, j) * z[j];
        }
      }
      form.offset = -spec.risk_aversion * quad;
      return form;
    }
    case ProblemKind::kScheduling: {
      const std::size_t M = spec.machines, T = spec.timeslots;
      form.slope.assign(T, 0.0);
      for (std::size_t j = 0; j < spec.jobs.size(); ++j) {
        const Job& job = spec.jobs[j];
        for (std::size_t m = 0; m < M; ++m) {
          for (std::size_t t = 0; t < T; ++t) {
            const double v = z[(j * M + m) * T + t];
            if (v == 0.0) continue;
            for (std::size_t tp = t;
                 tp < std::min(T, t + static_cast<std::size_t>(job.duration));
                 ++tp) {
              form.slope[tp] += v * job.power;
            }
          }
        }
      }
      return form;
    }
    default:
      form.slope.assign(z.begin(), z.end());
      return form;
  }
}

std::vector<double> objective_grad_y(const ProblemSpec& spec,
                                     std::span<const double> z,
                                     std::span<const double> y) {
  if (spec.kind != ProblemKind::kBudgetAllocation) {
    return affine_in_y(spec, z).slope;
  }
  const std::size_t M = spec.websites, N = spec.users;
  std::vector<double> g(M * N, 0.0);
  for (std::size_t w = 0; w < M; ++w) {
    if (z[w] == 0.0) continue;
    for (std::size_t u = 0; u < N; ++u) {
      double others = 1.0;
      for (std::size_t v = 0; v < M; ++v) {
        if (v != w) others *= 1.0 - z[v] * y[v * N + u];
      }
      g[w * N + u] = z[w] * others / static_cast<double>(N);
    }
  }
  return g;
}

std::vector<double> objective_grad_z(const ProblemSpec& spec,
                                     std::span<const double> z,
                                     std::span<const double> y) {
  switch (spec.kind) {
    case ProblemKind::kBudgetAllocation: {
      const std::size_t M = spec.websites, N = spec.users;
      std::vector<double> g(M, 0.0);
      for (std::size_t w = 0; w < M; ++w) {
        double s = 0.0;
        for (std::size_t u = 0; u < N; ++u) {
          double others = 1.0;
          for (std::size_t v = 0; v < M; ++v) {
            if (v != w) others *= 1.0 - z[v] * y[v * N + u];
          }
          s += y[w * N + u] * others;
        }
        g[w] = s / static_cast<double>(N);
      }
      return g;
    }
    case ProblemKind::kPortfolio: {
      const std::size_t n = z.size();
      std::vector<double> g(y.begin(), y.end());
      for (std::size_t i = 0; i < n; ++i) {
        double qz = 0.0;
        for (std::size_t j = 0; j < n; ++j) qz += spec.covariance.at(i, j) * z[j];
        g[i] -= 2.0 * spec.risk_aversion * qz;
      }
      return g;
    }
    case ProblemKind::kScheduling: {
      const std::size_t M = spec.machines, T = spec.timeslots;
      std::vector<double> g(spec.decision_size(), 0.0);
      for (std::size_t j = 0; j < spec.jobs.size(); ++j) {
        const Job& job = spec.jobs[j];
        for (std::size_t t = 0; t < T; ++t) {
          double cost = 0.0;
          for (std::size_t tp = t;
               tp < std::min(T, t + static_cast<std::size_t>(job.duration));
               ++tp) {
            cost += job.power * y[tp];
          }
          for (std::size_t m = 0; m < M; ++m) g[(j * M + m) * T + t] = cost;
        }
      }
      return g;
    }
    default:
      return std::vector<double>(y.begin(), y.end());
  }
}

NodeId objective_values_node(Graph& graph, const ProblemSpec& spec,
                             const std::vector<std::vector<double>>& solutions,
                             NodeId y_hat) {
  const std::size_t S = solutions.size();
  if (S == 0) throw StateError("objective_values_node: no solutions");
  if (spec.kind == ProblemKind::kBudgetAllocation) {
    const std::size_t M = spec.websites, N = spec.users;
    Tensor zmat(Shape{S, M});
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t w = 0; w < M; ++w) {
        const double v = solutions[s][w];
        if (v != 0.0 && v != 1.0) {
          throw UnsupportedError(
              "objective_values_node: budget allocation needs binary decisions");
        }
        zmat[s * M + w] = v;
      }
    }
    // prod_{w selected}(1 - y_wu) = exp(sum_w z_w log(1 - y_wu)). The factor
    // 1 - 1e-12 keeps a saturated sigmoid output of exactly 1 finite.
    NodeId y = graph.reshape(y_hat, Shape{M, N});
    NodeId log_miss =
        graph.log(graph.shift(graph.scale(y, -(1.0 - 1e-12)), 1.0));
    NodeId miss = graph.exp(graph.matmul(graph.constant(std::move(zmat)), log_miss));
    NodeId avg_miss = graph.matmul(
        miss, graph.constant(Tensor(Shape{N, 1}, 1.0 / static_cast<double>(N))));
    return graph.shift(graph.scale(avg_miss, -1.0), 1.0);
  }
  const std::size_t n = spec.coefficient_size();
  Tensor slopes(Shape{S, n});
  Tensor offsets(Shape{S, 1});
  bool any_offset = false;
  for (std::size_t s = 0; s < S; ++s) {
    AffineForm form = affine_in_y(spec, solutions[s]);
    std::copy(form.slope.begin(), form.slope.end(), &slopes[s * n]);
    offsets[s] = form.offset;
    any_offset = any_offset || form.offset != 0.0;
  }
  NodeId values = graph.matmul(graph.constant(std::move(slopes)),
                               graph.reshape(y_hat, Shape{n, 1}));
  if (any_offset) values = graph.add(values, graph.constant(std::move(offsets)));
  return values;
}

nlohmann::json ProblemSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["sense"] = to_string(sense);
  switch (kind) {
    case ProblemKind::kKnapsack:
      j["weights"] = weights;
      j["capacity"] = capacity;
      break;
    case ProblemKind::kTopK:
      j["items"] = items;
      j["k"] = k;
      break;
    case ProblemKind::kBudgetAllocation:
      j["websites"] = websites;
      j["users"] = users;
      j["budget"] = budget;
      break;
    case ProblemKind::kMatching:
      j["side"] = side;
      break;
    case ProblemKind::kPortfolio:
      j["n"] = covariance.rows();
      j["covariance"] = covariance.values();
      j["risk_aversion"] = risk_aversion;
      break;
    case ProblemKind::kAdvertising:
      j["users"] = users;
      j["strategy_costs"] = strategy_costs;
      j["total_budget"] = total_budget;
      break;
    case ProblemKind::kScheduling: {
      j["machines"] = machines;
      j["resources"] = resources;
      j["timeslots"] = timeslots;
      j["machine_capacity"] = machine_capacity.values();
      auto& arr = j["jobs"] = nlohmann::json::array();
      for (const Job& job : jobs) {
        arr.push_back({{"earliest_start", job.earliest_start},
                       {"latest_end", job.latest_end},
                       {"duration", job.duration},
                       {"power", job.power},
                       {"resource_usage", job.resource_usage}});
      }
      break;
    }
  }
  return j;
}

ProblemSpec ProblemSpec::from_json(const nlohmann::json& j) {
  ProblemSpec s;
  try {
    s.kind = problem_kind_from_string(j.at("kind").get<std::string>());
    s.sense = sense_from_string(j.value("sense", std::string(
        s.kind == ProblemKind::kScheduling ? "minimize" : "maximize")));
    switch (s.kind) {
      case ProblemKind::kKnapsack:
        s.weights = j.at("weights").get<std::vector<double>>();
        s.capacity = j.at("capacity").get<double>();
        break;
      case ProblemKind::kTopK:
        s.items = j.at("items").get<std::size_t>();
        s.k = j.at("k").get<std::size_t>();
        break;
      case ProblemKind::kBudgetAllocation:
        s.websites = j.at("websites").get<std::size_t>();
        s.users = j.at("users").get<std::size_t>();
        s.budget = j.at("budget").get<std::size_t>();
        break;
      case ProblemKind::kMatching:
        s.side = j.at("side").get<std::size_t>();
        break;
      case ProblemKind::kPortfolio: {
        const auto n = j.at("n").get<std::size_t>();
        s.covariance = Tensor(Shape{n, n},
                              j.at("covariance").get<std::vector<double>>());
        s.risk_aversion = j.value("risk_aversion", 0.1);
        break;
      }
      case ProblemKind::kAdvertising:
        s.users = j.at("users").get<std::size_t>();
        s.strategy_costs = j.at("strategy_costs").get<std::vector<double>>();
        s.total_budget = j.at("total_budget").get<double>();
        break;
      case ProblemKind::kScheduling:
        s.machines = j.value("machines", std::size_t{3});
        s.resources = j.value("resources", std::size_t{1});
        s.timeslots = j.value("timeslots", std::size_t{48});
        s.machine_capacity =
            Tensor(Shape{s.machines, s.resources},
                   j.at("machine_capacity").get<std::vector<double>>());
        for (const auto& jj : j.at("jobs")) {
          Job job;
          job.earliest_start = jj.at("earliest_start").get<int>();
          job.latest_end = jj.at("latest_end").get<int>();
          job.duration = jj.at("duration").get<int>();
          job.power = jj.at("power").get<double>();
          job.resource_usage =
              jj.at("resource_usage").get<std::vector<double>>();
          s.jobs.push_back(std::move(job));
        }
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("problem spec: ") + e.what());
  } catch (const DimensionError& e) {
    throw SchemaError(std::string("problem spec: ") + e.what());
  }
  s.validate();
  return s;
}

void validate_dataset(const Dataset& data) {
  const std::size_t n = data.spec.coefficient_size();
  auto check = [&](const std::vector<Instance>& split, const char* name) {
    for (std::size_t i = 0; i < split.size(); ++i) {
      if (split[i].y.size() != n) {
        throw DimensionError(std::string("dataset: ") + name + " instance " +
                             std::to_string(i) + " has " +
                             std::to_string(split[i].y.size()) +
                             " coefficients, spec expects " + std::to_string(n));
      }
    }
  };
  check(data.train, "train");
  check(data.test, "test");
}

namespace {

nlohmann::json tensor_to_json(const Tensor& t) {
  return {{"shape", t.shape()}, {"data", t.values()}};
}

Tensor tensor_from_json(const nlohmann::json& j) {
  return Tensor(j.at("shape").get<Shape>(),
                j.at("data").get<std::vector<double>>());
}

}  // namespace

nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j{{"x", tensor_to_json(inst.x)}, {"y", tensor_to_json(inst.y)}};
  if (inst.log) {
    j["log"] = {{"strategy", inst.log->strategy},
                {"converted", inst.log->converted}};
  }
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  inst.x = tensor_from_json(j.at("x"));
  inst.y = tensor_from_json(j.at("y"));
  if (j.contains("log")) {
    AdvertisingLog log;
    log.strategy = j["log"].at("strategy").get<std::vector<int>>();
    log.converted = j["log"].at("converted").get<std::vector<int>>();
    inst.log = std::move(log);
  }
  return inst;
}

nlohmann::json dataset_to_json(const Dataset& data) {
  nlohmann::json j;
  j["spec"] = data.spec.to_json();
  j["provenance"] = data.provenance;
  auto& train = j["train"] = nlohmann::json::array();
  for (const auto& inst : data.train) train.push_back(instance_to_json(inst));
  auto& test = j["test"] = nlohmann::json::array();
  for (const auto& inst : data.test) test.push_back(instance_to_json(inst));
  return j;
}

Dataset dataset_from_json(const nlohmann::json& j) {
  Dataset d;
  try {
    d.spec = ProblemSpec::from_json(j.at("spec"));
    d.provenance = j.value("provenance", nlohmann::json::object());
    for (const auto& jj : j.at("train")) d.train.push_back(instance_from_json(jj));
    for (const auto& jj : j.at("test")) d.test.push_back(instance_from_json(jj));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("dataset: ") + e.what());
  }
  validate_dataset(d);
  return d;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset to " + path);
  out << dataset_to_json(data).dump();
  if (!out) throw IoError("failed writing dataset to " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dataset from " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("dataset " + path + ": " + e.what());
  }
  return dataset_from_json(j);
}

}  // namespace pno
