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

#include "pno/solvers.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sys/wait.h>

#include "pno/error.hpp"
#include "pno/log.hpp"

namespace pno {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_kind(const ProblemSpec& spec, ProblemKind kind, const char* who) {
  if (spec.kind != kind) {
    throw ParameterError(std::string(who) + ": spec is " + to_string(spec.kind));
  }
}

void require_size(const ProblemSpec& spec, std::span<const double> y,
                  const char* who) {
  if (y.size() != spec.coefficient_size()) {
    throw DimensionError(std::string(who) + ": expected " +
                         std::to_string(spec.coefficient_size()) +
                         " coefficients, got " + std::to_string(y.size()));
  }
}

// Coefficients in maximize orientation.
std::vector<double> oriented(const ProblemSpec& spec,
                             std::span<const double> y) {
  std::vector<double> v(y.begin(), y.end());
  if (spec.sense == Sense::kMinimize) {
    for (double& e : v) e = -e;
  }
  return v;
}

Solution finish(const ProblemSpec& spec, std::vector<double> z,
                std::span<const double> y) {
  Solution s;
  s.objective = objective_unchecked(spec, z, y);
  s.z = std::move(z);
  s.feasible = true;
  return s;
}

// Score to maximize for a candidate decision.
double score(const ProblemSpec& spec, std::span<const double> z,
             std::span<const double> y) {
  return -spec.cost_sign() * objective_unchecked(spec, z, y);
}

bool integral(double v) { return std::abs(v - std::round(v)) < 1e-12; }

void check_capacity(const ProblemSpec& spec, const char* who) {
  if (spec.capacity < 0.0) {
    throw ParameterError(std::string(who) + ": negative capacity");
  }
  for (double w : spec.weights) {
    if (!(w >= 0.0)) throw ParameterError(std::string(who) + ": negative weight");
  }
}

std::vector<double> knapsack_dp(const std::vector<double>& v,
                                const std::vector<double>& w, long cap) {
  const std::size_t n = v.size();
  const std::size_t C = static_cast<std::size_t>(cap);
  std::vector<double> dp(C + 1, 0.0);
  std::vector<std::vector<char>> keep(n, std::vector<char>(C + 1, 0));
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] <= 0.0) continue;
    const auto wi = static_cast<std::size_t>(std::llround(w[i]));
    if (wi > C) continue;
    for (std::size_t c = C + 1; c-- > wi;) {
      const double cand = dp[c - wi] + v[i];
      if (cand > dp[c]) {
        dp[c] = cand;
        keep[i][c] = 1;
      }
    }
  }
  std::vector<double> z(n, 0.0);
  std::size_t c = C;
  for (std::size_t i = n; i-- > 0;) {
    if (keep[i][c]) {
      z[i] = 1.0;
      c -= static_cast<std::size_t>(std::llround(w[i]));
    }
  }
  return z;
}

struct BranchAndBound {
  std::vector<std::size_t> order;  // positive-value items by ratio
  const std::vector<double>* v;
  const std::vector<double>* w;
  std::vector<char> current, best;
  double best_value = kNegInf;

  double bound(std::size_t depth, double room, double value) const {
    for (std::size_t d = depth; d < order.size(); ++d) {
      const std::size_t i = order[d];
      if ((*w)[i] <= room) {
        room -= (*w)[i];
        value += (*v)[i];
      } else {
        return value + (*v)[i] * room / (*w)[i];
      }
    }
    return value;
  }

  void search(std::size_t depth, double room, double value) {
    if (depth == order.size()) {
      if (value > best_value) {
        best_value = value;
        best = current;
      }
      return;
    }
    if (bound(depth, room, value) <= best_value) return;
    const std::size_t i = order[depth];
    if ((*w)[i] <= room) {
      current[i] = 1;
      search(depth + 1, room - (*w)[i], value + (*v)[i]);
      current[i] = 0;
    }
    search(depth + 1, room, value);
  }
};

std::vector<std::size_t> by_ratio(const std::vector<double>& v,
                                  const std::vector<double>& w) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0 && w[i] > 0.0) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return v[a] * w[b] > v[b] * w[a];
  });
  return idx;
}

// Euclidean projection onto the probability simplex.
void project_simplex(std::vector<double>& x) {
  std::vector<double> u = x;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  for (double& e : x) e = std::max(0.0, e - theta);
}

}  // namespace

Solution solve_knapsack(const ProblemSpec& spec, std::span<const double> y) {
  require_kind(spec, ProblemKind::kKnapsack, "solve_knapsack");
  require_size(spec, y, "solve_knapsack");
  check_capacity(spec, "solve_knapsack");
  const std::vector<double> v = oriented(spec, y);
  const std::vector<double>& w = spec.weights;
  const std::size_t n = v.size();

  std::vector<double> z(n, 0.0);
  double room = spec.capacity;
  // Free items with positive value are always taken.
  std::vector<double> vv = v;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) {
      if (v[i] > 0.0) z[i] = 1.0;
      vv[i] = 0.0;
    }
  }
  const bool ints = std::all_of(w.begin(), w.end(), integral);
  const double cap_floor = std::floor(room + 1e-9);
  if (ints && cap_floor * static_cast<double>(n + 1) <= 5e7) {
    std::vector<double> picked = knapsack_dp(vv, w, static_cast<long>(cap_floor));
    for (std::size_t i = 0; i < n; ++i) {
      if (picked[i] > 0.0) z[i] = 1.0;
    }
    return finish(spec, std::move(z), y);
  }
  BranchAndBound bb;
  bb.order = by_ratio(vv, w);
  bb.v = &vv;
  bb.w = &w;
  bb.current.assign(n, 0);
  bb.best.assign(n, 0);
  bb.search(0, room, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (bb.best[i]) z[i] = 1.0;
  }
  return finish(spec, std::move(z), y);
}

Solution solve_knapsack_relaxed(const ProblemSpec& spec,
                                std::span<const double> y) {
  require_kind(spec, ProblemKind::kKnapsack, "solve_knapsack_relaxed");
  require_size(spec, y, "solve_knapsack_relaxed");
  check_capacity(spec, "solve_knapsack_relaxed");
  const std::vector<double> v = oriented(spec, y);
  const std::vector<double>& w = spec.weights;
  std::vector<double> z(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (w[i] == 0.0 && v[i] > 0.0) z[i] = 1.0;
  }
  double room = spec.capacity;
  for (std::size_t i : by_ratio(v, w)) {
    if (room <= 0.0) break;
    if (w[i] <= room) {
      z[i] = 1.0;
      room -= w[i];
    } else {
      z[i] = room / w[i];
      room = 0.0;
    }
  }
  return finish(spec, std::move(z), y);
}

Solution solve_topk(const ProblemSpec& spec, std::span<const double> y) {
  require_kind(spec, ProblemKind::kTopK, "solve_topk");
  require_size(spec, y, "solve_topk");
  if (spec.k > spec.items) throw ParameterError("solve_topk: k exceeds n");
  const std::vector<double> v = oriented(spec, y);
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  std::vector<double> z(v.size(), 0.0);
  for (std::size_t i = 0; i < spec.k; ++i) z[idx[i]] = 1.0;
  return finish(spec, std::move(z), y);
}

Solution solve_budget_allocation(const ProblemSpec& spec,
                                 std::span<const double> y) {
  require_kind(spec, ProblemKind::kBudgetAllocation, "solve_budget_allocation");
  require_size(spec, y, "solve_budget_allocation");
  if (spec.budget > spec.websites) {
    throw ParameterError("solve_budget_allocation: budget exceeds websites");
  }
  const std::size_t M = spec.websites;
  std::vector<double> best(M, 0.0);
  double best_value = score(spec, best, y);

  if (M <= 20) {
    std::vector<double> z(M, 0.0);
    // Subsets in order of size, then lexicographically.
    for (std::size_t size = 1; size <= spec.budget; ++size) {
      std::vector<std::size_t> pick(size);
      std::iota(pick.begin(), pick.end(), 0);
      while (true) {
        std::fill(z.begin(), z.end(), 0.0);
        for (auto p : pick) z[p] = 1.0;
        const double val = score(spec, z, y);
        if (val > best_value) {
          best_value = val;
          best = z;
        }
        std::size_t i = size;
        while (i > 0 && pick[i - 1] == M - size + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
      }
    }
    return finish(spec, std::move(best), y);
  }

  for (std::size_t round = 0; round < spec.budget; ++round) {
    std::size_t arg = M;
    double gain_best = best_value;
    for (std::size_t w = 0; w < M; ++w) {
      if (best[w] > 0.0) continue;
      best[w] = 1.0;
      const double val = score(spec, best, y);
      best[w] = 0.0;
      if (val > gain_best) {
        gain_best = val;
        arg = w;
      }
    }
    if (arg == M) break;
    best[arg] = 1.0;
    best_value = gain_best;
  }
  return finish(spec, std::move(best), y);
}

Solution solve_matching(const ProblemSpec& spec, std::span<const double> y) {
  require_kind(spec, ProblemKind::kMatching, "solve_matching");
  const std::size_t n = spec.side;
  if (y.size() != n * n) {
    throw DimensionError("solve_matching: expected a " + std::to_string(n) +
                         "x" + std::to_string(n) + " matrix, got " +
                         std::to_string(y.size()) + " entries");
  }
  const std::vector<double> v = oriented(spec, y);
  std::vector<double> z(n * n, 0.0);
  if (n == 0) return finish(spec, std::move(z), y);
  // Shortest augmenting path Hungarian algorithm on cost -v, 1-indexed.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), p_pot(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -v[(i0 - 1) * n + (j - 1)] - u[i0] - p_pot[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          p_pot[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) z[(p[j] - 1) * n + (j - 1)] = 1.0;
  return finish(spec, std::move(z), y);
}

Solution solve_portfolio(const ProblemSpec& spec, std::span<const double> y,
                         const PortfolioOptions& options) {
  require_kind(spec, ProblemKind::kPortfolio, "solve_portfolio");
  require_size(spec, y, "solve_portfolio");
  spec.validate();
  const std::size_t n = y.size();
  const Tensor& Q = spec.covariance;
  const double lam = spec.risk_aversion;
  double qnorm = 0.0;
  for (double q : Q.values()) qnorm += q * q;
  qnorm = std::sqrt(qnorm);
  const double step = 1.0 / (2.0 * lam * qnorm + 1.0);

  auto gradient = [&](const std::vector<double>& z) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      double qz = 0.0;
      for (std::size_t j = 0; j < n; ++j) qz += Q.at(i, j) * z[j];
      g[i] = y[i] - 2.0 * lam * qz;
    }
    return g;
  };
  auto value = [&](const std::vector<double>& z) {
    return objective_unchecked(spec, z, y);
  };

  // Accelerated projected gradient ascent with adaptive restart.
  std::vector<double> z(n, 1.0 / static_cast<double>(n)), mom = z, next(n);
  double t = 1.0, residual = std::numeric_limits<double>::infinity();
  double prev_value = value(z);
  for (int it = 0; it < options.max_iterations; ++it) {
    std::vector<double> g = gradient(mom);
    for (std::size_t i = 0; i < n; ++i) next[i] = mom[i] + step * g[i];
    project_simplex(next);
    const double next_value = value(next);
    if (next_value < prev_value) {
      // Restart from the last iterate without momentum.
      mom = z;
      t = 1.0;
      g = gradient(mom);
      for (std::size_t i = 0; i < n; ++i) next[i] = mom[i] + step * g[i];
      project_simplex(next);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) {
      mom[i] = next[i] + (t - 1.0) / t_next * (next[i] - z[i]);
    }
    t = t_next;
    z = next;
    prev_value = value(z);

    // Gradient mapping at the current iterate.
    std::vector<double> gz = gradient(z), probe(n);
    for (std::size_t i = 0; i < n; ++i) probe[i] = z[i] + step * gz[i];
    project_simplex(probe);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r += (probe[i] - z[i]) * (probe[i] - z[i]);
    residual = std::sqrt(r) / step;
    if (residual < options.tolerance) {
      z = probe;
      break;
    }
  }
  if (residual >= options.tolerance) {
    warn("solve_portfolio: not converged, gradient-mapping residual " +
         std::to_string(residual));
  }
  Solution s = finish(spec, std::move(z), y);
  s.residual = residual;
  return s;
}

Solution solve_advertising(const ProblemSpec& spec, std::span<const double> y) {
  require_kind(spec, ProblemKind::kAdvertising, "solve_advertising");
  require_size(spec, y, "solve_advertising");
  if (spec.total_budget < 0.0) {
    throw ParameterError("solve_advertising: negative budget");
  }
  const std::size_t N = spec.users, S = spec.strategy_costs.size();
  std::vector<std::size_t> cost(S);
  std::size_t max_cost = 0;
  for (std::size_t j = 0; j < S; ++j) {
    const double c2 = 2.0 * spec.strategy_costs[j];
    if (c2 < 0.0 || !integral(c2)) {
      throw ParameterError("solve_advertising: strategy costs must be "
                           "nonnegative multiples of 0.5");
    }
    cost[j] = static_cast<std::size_t>(std::llround(c2));
    max_cost = std::max(max_cost, cost[j]);
  }
  const double units = std::floor(2.0 * spec.total_budget + 1e-9);
  const std::size_t B = static_cast<std::size_t>(
      std::min(units, static_cast<double>(N * max_cost)));
  const std::vector<double> v = oriented(spec, y);

  // dp[b]: best value of the users so far with spend <= b half-units.
  std::vector<double> dp(B + 1, 0.0), nd(B + 1);
  std::vector<std::vector<unsigned short>> choice(
      N, std::vector<unsigned short>(B + 1, 0));
  const auto none = static_cast<unsigned short>(S);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t b = 0; b <= B; ++b) {
      double best = kNegInf;
      unsigned short arg = none;
      for (std::size_t j = 0; j < S; ++j) {
        if (cost[j] > b) continue;
        const double cand = dp[b - cost[j]] + v[i * S + j];
        if (cand > best) {
          best = cand;
          arg = static_cast<unsigned short>(j);
        }
      }
      if (dp[b] > best) {
        best = dp[b];
        arg = none;
      }
      nd[b] = best;
      choice[i][b] = arg;
    }
    std::swap(dp, nd);
  }
  std::vector<double> z(N * S, 0.0);
  std::size_t b = B;
  for (std::size_t i = N; i-- > 0;) {
    const unsigned short j = choice[i][b];
    if (j != none) {
      z[i * S + j] = 1.0;
      b -= cost[j];
    }
  }
  return finish(spec, std::move(z), y);
}

Solution brute_force(const ProblemSpec& spec, std::span<const double> y,
                     std::optional<std::size_t> max_dim) {
  require_size(spec, y, "brute_force");
  const std::size_t D = spec.decision_size();
  auto refuse = [&](std::size_t dim, std::size_t limit) {
    throw UnsupportedError("brute_force: dimension " + std::to_string(dim) +
                           " exceeds the limit " + std::to_string(limit));
  };
  std::vector<double> best;
  double best_value = kNegInf;
  auto consider = [&](const std::vector<double>& z) {
    if (!check_feasible(spec, z).feasible) return;
    const double val = score(spec, z, y);
    if (val > best_value) {
      best_value = val;
      best = z;
    }
  };

  switch (spec.kind) {
    case ProblemKind::kKnapsack:
    case ProblemKind::kTopK:
    case ProblemKind::kBudgetAllocation: {
      const std::size_t limit = max_dim.value_or(15);
      if (D > limit) refuse(D, limit);
      std::vector<double> z(D);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << D); ++mask) {
        for (std::size_t i = 0; i < D; ++i) z[i] = (mask >> i) & 1 ? 1.0 : 0.0;
        consider(z);
      }
      break;
    }
    case ProblemKind::kMatching: {
      const std::size_t n = spec.side, limit = max_dim.value_or(7);
      if (n > limit) refuse(n, limit);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::vector<double> z(D);
      do {
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) z[i * n + perm[i]] = 1.0;
        consider(z);
      } while (std::next_permutation(perm.begin(), perm.end()));
      break;
    }
    case ProblemKind::kAdvertising: {
      const std::size_t limit = max_dim.value_or(15);
      if (D > limit) refuse(D, limit);
      const std::size_t N = spec.users, S = spec.strategy_costs.size();
      std::vector<std::size_t> pick(N, 0);  // S means no strategy
      std::vector<double> z(D);
      while (true) {
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t i = 0; i < N; ++i) {
          if (pick[i] < S) z[i * S + pick[i]] = 1.0;
        }
        consider(z);
        std::size_t i = 0;
        while (i < N && ++pick[i] > S) pick[i++] = 0;
        if (i == N) break;
      }
      break;
    }
    case ProblemKind::kScheduling: {
      const std::size_t J = spec.jobs.size(), limit = max_dim.value_or(15);
      if (J > limit) refuse(J, limit);
      const std::size_t M = spec.machines, T = spec.timeslots;
      std::vector<std::vector<std::size_t>> options(J);
      double combos = 1.0;
      for (std::size_t j = 0; j < J; ++j) {
        const Job& job = spec.jobs[j];
        for (std::size_t m = 0; m < M; ++m) {
          for (int t = job.earliest_start; t + job.duration <= job.latest_end; ++t) {
            options[j].push_back((j * M + m) * T + static_cast<std::size_t>(t));
          }
        }
        if (options[j].empty()) {
          throw FeasibilityError("brute_force: job " + std::to_string(j) +
                                 " has no start within its window");
        }
        combos *= static_cast<double>(options[j].size());
      }
      if (combos > 2e7) {
        throw UnsupportedError("brute_force: scheduling enumeration too large");
      }
      std::vector<std::size_t> pick(J, 0);
      std::vector<double> z(D, 0.0);
      while (true) {
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t j = 0; j < J; ++j) z[options[j][pick[j]]] = 1.0;
        consider(z);
        std::size_t j = 0;
        while (j < J && ++pick[j] == options[j].size()) pick[j++] = 0;
        if (j == J) break;
      }
      break;
    }
    case ProblemKind::kPortfolio:
      throw UnsupportedError("brute_force: portfolio is continuous");
  }
  if (best.empty()) {
    throw FeasibilityError(std::string("brute_force: no feasible ") +
                           to_string(spec.kind) + " decision");
  }
  return finish(spec, std::move(best), y);
}

ExternalProcessSolver::ExternalProcessSolver(std::string command)
    : command_(std::move(command)) {
  if (command_.empty()) throw ParameterError("external solver: empty command");
}

Solution ExternalProcessSolver::solve(const ProblemSpec& spec,
                                      std::span<const double> y) const {
  require_size(spec, y, "external solver");
  char path[] = "/tmp/pnobench-solver-XXXXXX";
  const int fd = mkstemp(path);
  if (fd < 0) throw IoError("external solver: cannot create a temporary file");
  close(fd);
  {
    std::ofstream out(path);
    nlohmann::json request = {{"spec", spec.to_json()},
                              {"y", std::vector<double>(y.begin(), y.end())}};
    out << request.dump();
  }
  const std::string cmd = command_ + " < '" + path + "'";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    std::remove(path);
    throw SolverError("external solver: cannot start '" + command_ + "'");
  }
  std::string output;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
  const int status = pclose(pipe);
  std::remove(path);
  if (status != 0) {
    throw SolverError("external solver '" + command_ + "' exited with status " +
                      std::to_string(WIFEXITED(status) ? WEXITSTATUS(status)
                                                       : status));
  }
  std::vector<double> z;
  std::optional<double> reported;
  try {
    const auto reply = nlohmann::json::parse(output);
    z = reply.at("z").get<std::vector<double>>();
    if (reply.contains("objective") && !reply["objective"].is_null()) {
      reported = reply["objective"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SolverError(std::string("external solver: malformed reply: ") +
                      e.what());
  }
  const FeasibilityReport rep = check_feasible(spec, z);
  if (!rep.feasible) {
    std::string msg = "external solver returned an infeasible decision:";
    for (const auto& v : rep.violations) msg += " [" + v + "]";
    throw SolverError(msg);
  }
  Solution s = finish(spec, std::move(z), y);
  if (reported && std::abs(*reported - *s.objective) >
                      1e-6 * std::max(1.0, std::abs(*s.objective))) {
    warn("external solver reported objective " + std::to_string(*reported) +
         " but the decision evaluates to " + std::to_string(*s.objective));
  }
  return s;
}

Solution solve(const ProblemSpec& spec, std::span<const double> y,
               const SolverOptions& options) {
  if (options.external) return options.external->solve(spec, y);
  switch (spec.kind) {
    case ProblemKind::kKnapsack:
      return options.relaxed ? solve_knapsack_relaxed(spec, y)
                             : solve_knapsack(spec, y);
    case ProblemKind::kTopK:
      return solve_topk(spec, y);
    case ProblemKind::kBudgetAllocation:
      return solve_budget_allocation(spec, y);
    case ProblemKind::kMatching:
      return solve_matching(spec, y);
    case ProblemKind::kPortfolio:
      return solve_portfolio(spec, y);
    case ProblemKind::kAdvertising:
      return solve_advertising(spec, y);
    case ProblemKind::kScheduling:
      throw UnsupportedError(
          "scheduling has no built-in solver; configure an external solver");
  }
  throw UnsupportedError("unknown problem kind");
}

}  // namespace pno
