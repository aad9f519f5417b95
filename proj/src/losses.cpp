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

#include "pno/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pno/error.hpp"

namespace pno {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MethodName {
  Method method;
  const char* name;
  MethodCategory category;
};

constexpr MethodName kMethods[] = {
    {Method::kTwoStage, "two_stage", MethodCategory::kPto},
    {Method::kDfl, "dfl", MethodCategory::kDiscrete},
    {Method::kBlackbox, "blackbox", MethodCategory::kDiscrete},
    {Method::kIdentity, "identity", MethodCategory::kDiscrete},
    {Method::kPerturb, "perturb", MethodCategory::kDiscrete},
    {Method::kImle, "imle", MethodCategory::kDiscrete},
    {Method::kSpoPlus, "spo_plus", MethodCategory::kContinuous},
    {Method::kQptl, "qptl", MethodCategory::kContinuous},
    {Method::kNce, "nce", MethodCategory::kStatistical},
    {Method::kLtrPointwise, "ltr_pointwise", MethodCategory::kStatistical},
    {Method::kLtrPairwise, "ltr_pairwise", MethodCategory::kStatistical},
    {Method::kLtrListwise, "ltr_listwise", MethodCategory::kStatistical},
    {Method::kLodl, "lodl", MethodCategory::kSurrogate},
};

void require_sizes(const ProblemSpec& spec, std::span<const double> y,
                   const char* who) {
  if (y.size() != spec.coefficient_size()) {
    throw DimensionError(std::string(who) + ": expected " +
                         std::to_string(spec.coefficient_size()) +
                         " coefficients, got " + std::to_string(y.size()));
  }
}

std::vector<double> combine(std::span<const double> a, double alpha,
                            std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * b[i];
  return out;
}

// F(z, y) = s * f(z, y)
double cost(const ProblemSpec& spec, std::span<const double> z,
            std::span<const double> y) {
  return spec.cost_sign() * objective_unchecked(spec, z, y);
}

std::vector<double> cost_grad_y(const ProblemSpec& spec,
                                std::span<const double> z,
                                std::span<const double> y) {
  std::vector<double> g = objective_grad_y(spec, z, y);
  for (double& v : g) v *= spec.cost_sign();
  return g;
}

std::vector<double> round_key(const std::vector<double>& z) {
  std::vector<double> key(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    key[i] = std::round(z[i] * 1e9) / 1e9;
    if (key[i] == 0.0) key[i] = 0.0;  // fold -0
  }
  return key;
}

const char* origin_name(CacheOrigin o) {
  return o == CacheOrigin::kTraining ? "training" : "instance_optimum";
}

}  // namespace

const char* to_string(Method method) {
  for (const auto& m : kMethods) {
    if (m.method == method) return m.name;
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  for (const auto& m : kMethods) {
    if (s == m.name) return m.method;
  }
  if (s == "spo" || s == "spo+") return Method::kSpoPlus;
  if (s == "listwise") return Method::kLtrListwise;
  if (s == "pairwise") return Method::kLtrPairwise;
  if (s == "pointwise") return Method::kLtrPointwise;
  throw ConfigError("unknown method '" + s + "'");
}

MethodCategory category(Method method) {
  for (const auto& m : kMethods) {
    if (m.method == method) return m.category;
  }
  return MethodCategory::kPto;
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (const auto& m : kMethods) out.push_back(m.method);
  return out;
}

void LossConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("loss config: " + what);
  };
  need(interp_lambda > 0.0, "interp_lambda must be > 0");
  need(temperature > 0.0, "temperature must be > 0");
  need(margin >= 0.0, "margin must be >= 0");
  need(noise_scale >= 0.0, "noise_scale must be >= 0");
  need(perturb_samples >= 1, "perturb_samples must be >= 1");
  need(qp_gamma > 0.0, "qp_gamma must be > 0");
  need(lodl_samples >= 1, "lodl_samples must be >= 1");
  need(lodl_noise_fraction > 0.0, "lodl_noise_fraction must be > 0");
  need(!lodl_noise || *lodl_noise > 0.0, "lodl_noise must be > 0");
  need(cache_growth >= 0.0 && cache_growth <= 1.0,
       "cache_growth must be in [0, 1]");
}

nlohmann::json LossConfig::to_json() const {
  nlohmann::json j = {{"method", to_string(method)},
                      {"pto_loss", to_string(pto_loss)},
                      {"interp_lambda", interp_lambda},
                      {"temperature", temperature},
                      {"margin", margin},
                      {"noise_scale", noise_scale},
                      {"perturb_samples", perturb_samples},
                      {"qp_gamma", qp_gamma},
                      {"lodl_samples", lodl_samples},
                      {"lodl_noise_fraction", lodl_noise_fraction},
                      {"cache_growth", cache_growth},
                      {"spo_relax", spo_relax}};
  j["lodl_noise"] = lodl_noise ? nlohmann::json(*lodl_noise) : nlohmann::json();
  return j;
}

LossConfig LossConfig::from_json(const nlohmann::json& j) {
  LossConfig c;
  try {
    if (j.contains("method")) c.method = method_from_string(j["method"]);
    if (j.contains("pto_loss")) c.pto_loss = pto_loss_from_string(j["pto_loss"]);
    c.interp_lambda = j.value("interp_lambda", c.interp_lambda);
    c.temperature = j.value("temperature", c.temperature);
    c.margin = j.value("margin", c.margin);
    c.noise_scale = j.value("noise_scale", c.noise_scale);
    c.perturb_samples = j.value("perturb_samples", c.perturb_samples);
    c.qp_gamma = j.value("qp_gamma", c.qp_gamma);
    c.lodl_samples = j.value("lodl_samples", c.lodl_samples);
    c.lodl_noise_fraction = j.value("lodl_noise_fraction", c.lodl_noise_fraction);
    if (j.contains("lodl_noise") && !j["lodl_noise"].is_null()) {
      c.lodl_noise = j["lodl_noise"].get<double>();
    }
    c.cache_growth = j.value("cache_growth", c.cache_growth);
    c.spo_relax = j.value("spo_relax", c.spo_relax);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("loss config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

std::vector<double> dfl_gradient(const ProblemSpec& spec,
                                 std::span<const double> y_hat,
                                 std::span<const double> z_hat) {
  require_sizes(spec, y_hat, "dfl_gradient");
  return cost_grad_y(spec, z_hat, y_hat);
}

std::vector<double> discrete_interp_gradient(
    InterpVariant variant, const ProblemSpec& spec,
    std::span<const double> y_hat, std::span<const double> dl_dz,
    std::span<const double> y_true, const LossConfig& config,
    std::mt19937_64& rng, const SolverOptions& solver) {
  require_sizes(spec, y_hat, "discrete_interp_gradient");
  const std::size_t n = y_hat.size();
  if (spec.decision_size() != n) {
    throw UnsupportedError(std::string("discrete_interp_gradient: ") +
                           to_string(spec.kind) +
                           " decisions and coefficients differ in size");
  }
  if (dl_dz.size() != n) {
    throw DimensionError("discrete_interp_gradient: dL/dz has the wrong size");
  }
  const double s = spec.cost_sign();
  std::vector<double> grad(n, 0.0);

  // Coefficients whose cost is c + delta, where c = s * y_hat.
  auto shifted = [&](std::span<const double> delta) {
    std::vector<double> out(y_hat.begin(), y_hat.end());
    for (std::size_t i = 0; i < n; ++i) out[i] += s * delta[i];
    return out;
  };
  std::normal_distribution<double> normal(0.0, config.noise_scale);
  auto noise = [&]() {
    std::vector<double> r(n);
    for (double& v : r) v = normal(rng);
    return r;
  };

  switch (variant) {
    case InterpVariant::kBlackbox: {
      if (!(config.interp_lambda > 0.0)) {
        throw ConfigError("blackbox: interp_lambda must be > 0");
      }
      const double lam = config.interp_lambda;
      std::vector<double> step(dl_dz.begin(), dl_dz.end());
      for (double& v : step) v *= lam;
      const Solution moved = solve(spec, shifted(step), solver);
      const Solution base = solve(spec, y_hat, solver);
      for (std::size_t i = 0; i < n; ++i) {
        grad[i] = s * (moved.z[i] - base.z[i]) / lam;
      }
      break;
    }
    case InterpVariant::kIdentity:
      for (std::size_t i = 0; i < n; ++i) grad[i] = -s * dl_dz[i];
      break;
    case InterpVariant::kPerturb: {
      require_sizes(spec, y_true, "perturb");
      const Solution truth = solve(spec, y_true, solver);
      for (int k = 0; k < config.perturb_samples; ++k) {
        const std::vector<double> r = noise();
        const Solution z = solve(spec, combine(y_hat, 1.0, r), solver);
        for (std::size_t i = 0; i < n; ++i) grad[i] += z.z[i];
      }
      // Fenchel-Young in cost form: dL/dc = z*(y) - E z*(c + R).
      for (std::size_t i = 0; i < n; ++i) {
        const double mean = grad[i] / config.perturb_samples;
        grad[i] = s * (truth.z[i] - mean);
      }
      break;
    }
    case InterpVariant::kImle: {
      if (!(config.interp_lambda > 0.0)) {
        throw ConfigError("imle: interp_lambda must be > 0");
      }
      std::vector<double> step(dl_dz.begin(), dl_dz.end());
      for (double& v : step) v *= config.interp_lambda;
      for (int k = 0; k < config.perturb_samples; ++k) {
        const std::vector<double> r = noise();
        const std::vector<double> base_coef = combine(y_hat, 1.0, r);
        std::vector<double> target_coef = base_coef;
        for (std::size_t i = 0; i < n; ++i) target_coef[i] += s * step[i];
        const Solution target = solve(spec, target_coef, solver);
        const Solution base = solve(spec, base_coef, solver);
        for (std::size_t i = 0; i < n; ++i) grad[i] += target.z[i] - base.z[i];
      }
      for (double& g : grad) g = s * g / config.perturb_samples;
      break;
    }
  }
  return grad;
}

LossAndGrad spo_plus_loss(const ProblemSpec& spec,
                          std::span<const double> y_hat,
                          std::span<const double> y,
                          const SolverOptions& solver,
                          const std::vector<double>* z_true) {
  require_sizes(spec, y_hat, "spo_plus_loss");
  require_sizes(spec, y, "spo_plus_loss");
  const std::size_t n = y.size();
  std::vector<double> twice(n);
  for (std::size_t i = 0; i < n; ++i) twice[i] = 2.0 * y_hat[i] - y[i];
  const std::vector<double> z1 = solve(spec, twice, solver).z;
  const std::vector<double> z2 = z_true ? *z_true : solve(spec, y, solver).z;
  LossAndGrad out;
  out.loss = -cost(spec, z1, twice) + 2.0 * cost(spec, z2, y_hat) -
             cost(spec, z2, y);
  const std::vector<double> g1 = cost_grad_y(spec, z1, twice);
  const std::vector<double> g2 = cost_grad_y(spec, z2, y_hat);
  out.grad.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.grad[i] = -2.0 * g1[i] + 2.0 * g2[i];
  return out;
}

QpProblem qptl_problem(const ProblemSpec& spec, std::span<const double> y_hat,
                       double gamma) {
  require_sizes(spec, y_hat, "qptl");
  if (!(gamma > 0.0)) throw ConfigError("qptl: qp_gamma must be > 0");
  const auto n = static_cast<Eigen::Index>(spec.decision_size());
  if (spec.kind == ProblemKind::kBudgetAllocation ||
      spec.kind == ProblemKind::kScheduling) {
    throw UnsupportedError(std::string("qptl: no quadratic relaxation for ") +
                           to_string(spec.kind));
  }
  QpProblem p;
  p.P = 2.0 * gamma * Eigen::MatrixXd::Identity(n, n);
  p.q.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) p.q(i) = spec.cost_sign() * y_hat[i];
  if (spec.kind == ProblemKind::kPortfolio) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        p.P(i, j) += 2.0 * spec.risk_aversion * spec.covariance.at(i, j);
      }
    }
  }
  // Structural rows first, then the [0, 1] box.
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> lo, hi;
  auto add_row = [&](Eigen::VectorXd r, double l, double u) {
    rows.push_back(std::move(r));
    lo.push_back(l);
    hi.push_back(u);
  };
  switch (spec.kind) {
    case ProblemKind::kKnapsack: {
      Eigen::VectorXd r(n);
      for (Eigen::Index i = 0; i < n; ++i) r(i) = spec.weights[i];
      add_row(r, -kInf, spec.capacity);
      break;
    }
    case ProblemKind::kTopK:
      add_row(Eigen::VectorXd::Ones(n), static_cast<double>(spec.k),
              static_cast<double>(spec.k));
      break;
    case ProblemKind::kPortfolio:
      add_row(Eigen::VectorXd::Ones(n), 1.0, 1.0);
      break;
    case ProblemKind::kMatching: {
      const auto m = static_cast<Eigen::Index>(spec.side);
      for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(n), col = Eigen::VectorXd::Zero(n);
        for (Eigen::Index j = 0; j < m; ++j) {
          row(i * m + j) = 1.0;
          col(j * m + i) = 1.0;
        }
        add_row(row, 1.0, 1.0);
        add_row(col, 1.0, 1.0);
      }
      break;
    }
    case ProblemKind::kAdvertising: {
      const auto S = static_cast<Eigen::Index>(spec.strategy_costs.size());
      Eigen::VectorXd spend = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(spec.users); ++i) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
        for (Eigen::Index j = 0; j < S; ++j) {
          r(i * S + j) = 1.0;
          spend(i * S + j) = spec.strategy_costs[j];
        }
        add_row(r, -kInf, 1.0);
      }
      add_row(spend, -kInf, spec.total_budget);
      break;
    }
    default:
      break;
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  p.A.resize(m + n, n);
  p.l.resize(m + n);
  p.u.resize(m + n);
  for (Eigen::Index i = 0; i < m; ++i) {
    p.A.row(i) = rows[i].transpose();
    p.l(i) = lo[i];
    p.u(i) = hi[i];
  }
  p.A.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
  p.l.tail(n).setZero();
  p.u.tail(n).setOnes();
  return p;
}

QptlResult qptl_forward(const ProblemSpec& spec, std::span<const double> y_hat,
                        double gamma) {
  QptlResult r;
  r.problem = qptl_problem(spec, y_hat, gamma);
  r.solution = solve_qp(r.problem);
  const Eigen::VectorXd& x = r.solution.x;
  r.z.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    r.z[i] = std::clamp(x(i), 0.0, 1.0);
  }
  return r;
}

std::vector<double> qptl_backward(const ProblemSpec& spec,
                                  const QptlResult& forward,
                                  std::span<const double> dl_dz) {
  const auto n = forward.problem.q.size();
  if (static_cast<Eigen::Index>(dl_dz.size()) != n) {
    throw DimensionError("qptl_backward: dL/dz has the wrong size");
  }
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = dl_dz[i];
  const Eigen::VectorXd dq = qp_backward_q(forward.problem, forward.solution, g);
  std::vector<double> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = spec.cost_sign() * dq(i);
  return out;
}

bool SolutionCache::add(const std::vector<double>& z, CacheOrigin origin) {
  if (solutions_.empty() && decision_size_ == 0) decision_size_ = z.size();
  if (z.size() != decision_size_) {
    throw DimensionError("solution cache: decision of size " +
                         std::to_string(z.size()) + ", cache holds size " +
                         std::to_string(decision_size_));
  }
  if (!keys_.insert(round_key(z)).second) return false;
  solutions_.push_back(z);
  origins_.push_back(origin);
  return true;
}

std::optional<std::size_t> SolutionCache::find(const std::vector<double>& z) const {
  if (z.size() != decision_size_ || !keys_.count(round_key(z))) return std::nullopt;
  const auto key = round_key(z);
  for (std::size_t i = 0; i < solutions_.size(); ++i) {
    if (round_key(solutions_[i]) == key) return i;
  }
  return std::nullopt;
}

nlohmann::json SolutionCache::to_json() const {
  nlohmann::json j;
  j["decision_size"] = decision_size_;
  j["solutions"] = solutions_;
  auto& o = j["origins"] = nlohmann::json::array();
  for (auto origin : origins_) o.push_back(origin_name(origin));
  return j;
}

SolutionCache SolutionCache::from_json(const nlohmann::json& j) {
  try {
    SolutionCache c(j.at("decision_size").get<std::size_t>());
    const auto sols = j.at("solutions").get<std::vector<std::vector<double>>>();
    const auto& origins = j.at("origins");
    if (origins.size() != sols.size()) {
      throw SchemaError("solution cache: origins and solutions differ in length");
    }
    for (std::size_t i = 0; i < sols.size(); ++i) {
      const auto name = origins[i].get<std::string>();
      if (name != "training" && name != "instance_optimum") {
        throw SchemaError("solution cache: unknown origin '" + name + "'");
      }
      c.add(sols[i], name == "training" ? CacheOrigin::kTraining
                                        : CacheOrigin::kInstanceOptimum);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("solution cache: ") + e.what());
  } catch (const DimensionError& e) {
    throw SchemaError(std::string("solution cache: ") + e.what());
  }
}

SolutionCache build_solution_cache(const std::vector<Instance>& instances,
                                   const ProblemSpec& spec,
                                   const SolverOptions& solver) {
  std::vector<std::vector<double>> optima;
  for (const auto& inst : instances) {
    if (inst.y.size() != spec.coefficient_size()) {
      throw UnsupportedError(
          "solution cache: instances of varying decision size are not "
          "supported");
    }
    optima.push_back(solve(spec, inst.y.values(), solver).z);
  }
  return build_solution_cache(optima, spec);
}

SolutionCache build_solution_cache(
    const std::vector<std::vector<double>>& optima, const ProblemSpec& spec) {
  SolutionCache cache(spec.decision_size());
  for (const auto& z : optima) {
    if (z.size() != spec.decision_size()) {
      throw UnsupportedError(
          "solution cache: instances of varying decision size are not "
          "supported");
    }
    cache.add(z, CacheOrigin::kInstanceOptimum);
  }
  return cache;
}

Tensor statistical_target(StatVariant variant, const ProblemSpec& spec,
                          const SolutionCache& cache, std::span<const double> y,
                          std::size_t star, const LossConfig& config) {
  const std::size_t S = cache.size();
  if (S == 0) throw StateError("statistical loss: empty solution cache");
  require_sizes(spec, y, "statistical_target");
  const double s = spec.cost_sign();
  std::vector<double> f(S);
  for (std::size_t k = 0; k < S; ++k) {
    f[k] = objective_unchecked(spec, cache.solutions()[k], y);
  }
  switch (variant) {
    case StatVariant::kNce: {
      if (star >= S) throw StateError("nce: optimum index outside the cache");
      Tensor t(Shape{1, S}, -s);
      t[star] += s * static_cast<double>(S);
      return t;
    }
    case StatVariant::kPointwise:
      return Tensor(Shape{S, 1}, f);
    case StatVariant::kPairwise: {
      Tensor mask(Shape{S, S});
      for (std::size_t p = 0; p < S; ++p) {
        for (std::size_t q = 0; q < S; ++q) {
          if (s * f[p] < s * f[q]) mask.at(p, q) = 1.0;
        }
      }
      return mask;
    }
    case StatVariant::kListwise: {
      // log softmax of -F/tau
      std::vector<double> logits(S);
      double mx = -kInf;
      for (std::size_t k = 0; k < S; ++k) {
        logits[k] = -s * f[k] / config.temperature;
        mx = std::max(mx, logits[k]);
      }
      double z = 0.0;
      for (double l : logits) z += std::exp(l - mx);
      const double lse = mx + std::log(z);
      for (double& l : logits) l -= lse;
      return Tensor(Shape{S, 1}, logits);
    }
  }
  throw StateError("unknown statistical variant");
}

NodeId statistical_loss_node(Graph& graph, StatVariant variant,
                             const ProblemSpec& spec, const SolutionCache& cache,
                             NodeId y_hat, const LossConfig& config) {
  const std::size_t S = cache.size();
  if (S == 0) throw StateError("statistical loss: empty solution cache");
  const double s = spec.cost_sign();
  NodeId values = objective_values_node(graph, spec, cache.solutions(), y_hat);
  NodeId target = graph.input("stat_target");
  switch (variant) {
    case StatVariant::kNce:
      return graph.sum(graph.matmul(target, values));
    case StatVariant::kPointwise:
      return graph.mean(graph.square(graph.sub(values, target)));
    case StatVariant::kPairwise: {
      NodeId costs = graph.scale(values, s);
      NodeId row_of_p = graph.matmul(costs, graph.constant(Tensor(Shape{1, S}, 1.0)));
      NodeId row_of_q = graph.matmul(graph.constant(Tensor(Shape{S, 1}, 1.0)),
                                     graph.reshape(costs, Shape{1, S}));
      NodeId hinge =
          graph.relu(graph.shift(graph.sub(row_of_p, row_of_q), config.margin));
      return graph.sum(graph.mul(target, hinge));
    }
    case StatVariant::kListwise: {
      NodeId log_p_hat = graph.log_softmax(graph.scale(values, -s), config.temperature);
      NodeId p = graph.exp(target);
      NodeId kl = graph.sum(graph.mul(p, graph.sub(target, log_p_hat)));
      return graph.scale(kl, 1.0 / static_cast<double>(S));
    }
  }
  throw StateError("unknown statistical variant");
}

LossAndGrad statistical_loss(StatVariant variant, const ProblemSpec& spec,
                             std::span<const double> y_hat,
                             std::span<const double> y,
                             const SolutionCache& cache,
                             const LossConfig& config,
                             const SolverOptions& solver) {
  if (cache.empty()) throw StateError("statistical loss: empty solution cache");
  require_sizes(spec, y_hat, "statistical_loss");
  require_sizes(spec, y, "statistical_loss");
  SolutionCache local = cache;
  const std::vector<double> z_star = solve(spec, y, solver).z;
  local.add(z_star, CacheOrigin::kInstanceOptimum);
  const std::size_t star = *local.find(z_star);

  Graph graph;
  NodeId yh = graph.input("y_hat");
  NodeId loss = statistical_loss_node(graph, variant, spec, local, yh, config);
  graph.set_root(loss);
  NamedTensors inputs;
  inputs.emplace("y_hat", Tensor(Shape{y_hat.size()},
                                 std::vector<double>(y_hat.begin(), y_hat.end())));
  inputs.emplace("stat_target",
                 statistical_target(variant, spec, local, y, star, config));
  LossAndGrad out;
  out.loss = graph.forward(inputs).item();
  NamedTensors grads = graph.backward(Tensor::scalar(1.0));
  out.grad = grads.at("y_hat").values();
  return out;
}

nlohmann::json LodlSurrogate::to_json() const {
  return {{"center", center},     {"weights", weights},
          {"r_squared", r_squared}, {"samples", samples},
          {"degenerate", degenerate}};
}

LodlSurrogate LodlSurrogate::from_json(const nlohmann::json& j) {
  LodlSurrogate s;
  try {
    s.center = j.at("center").get<std::vector<double>>();
    s.weights = j.at("weights").get<std::vector<double>>();
    s.r_squared = j.at("r_squared").get<double>();
    s.samples = j.at("samples").get<std::size_t>();
    s.degenerate = j.at("degenerate").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("lodl surrogate: ") + e.what());
  }
  if (s.center.size() != s.weights.size()) {
    throw SchemaError("lodl surrogate: center and weights differ in length");
  }
  for (double w : s.weights) {
    if (w < 0.0) throw SchemaError("lodl surrogate: negative weight");
  }
  return s;
}

std::vector<double> nnls(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xtr) {
  const Eigen::Index d = xtr.size();
  std::vector<char> passive(d, 0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  const double tol = 1e-12 * std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (passive[i]) idx.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd g(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      b(a) = xtr(idx[a]);
      for (Eigen::Index c = 0; c < k; ++c) g(a, c) = gram(idx[a], idx[c]);
    }
    Eigen::VectorXd sol = g.ldlt().solve(b);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(d);
    for (Eigen::Index a = 0; a < k; ++a) full(idx[a]) = sol(a);
    return full;
  };

  for (int outer = 0; outer < 3 * d + 10; ++outer) {
    const Eigen::VectorXd grad = xtr - gram * w;  // negative gradient
    Eigen::Index best = -1;
    double best_val = tol;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!passive[i] && grad(i) > best_val) {
        best_val = grad(i);
        best = i;
      }
    }
    if (best < 0) break;
    passive[best] = 1;
    for (int inner = 0; inner < 3 * d + 10; ++inner) {
      const Eigen::VectorXd s = solve_passive();
      bool ok = true;
      for (Eigen::Index i = 0; i < d; ++i) {
        if (passive[i] && s(i) <= 0.0) ok = false;
      }
      if (ok) {
        w = s;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        if (passive[i] && s(i) <= 0.0) {
          alpha = std::min(alpha, w(i) / (w(i) - s(i)));
        }
      }
      w += alpha * (s - w);
      for (Eigen::Index i = 0; i < d; ++i) {
        if (passive[i] && w(i) <= tol) {
          passive[i] = 0;
          w(i) = 0.0;
        }
      }
    }
  }
  std::vector<double> out(d);
  for (Eigen::Index i = 0; i < d; ++i) out[i] = std::max(0.0, w(i));
  return out;
}

LodlSurrogate lodl_fit_instance(const ProblemSpec& spec,
                                std::span<const double> y,
                                const LossConfig& config, std::mt19937_64& rng,
                                const SolverOptions& solver) {
  require_sizes(spec, y, "lodl_fit");
  const std::size_t d = y.size();
  const auto K = static_cast<std::size_t>(config.lodl_samples);
  if (K < d) {
    throw ConfigError("lodl: lodl_samples (" + std::to_string(K) +
                      ") must be at least the coefficient size (" +
                      std::to_string(d) + ")");
  }
  double sigma = 0.0;
  if (config.lodl_noise) {
    sigma = *config.lodl_noise;
  } else {
    double mean = 0.0, var = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(d);
    for (double v : y) var += (v - mean) * (v - mean);
    sigma = config.lodl_noise_fraction * std::sqrt(var / static_cast<double>(d));
  }

  const std::vector<double> z_star = solve(spec, y, solver).z;
  const double best = objective_unchecked(spec, z_star, y);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd xtr = Eigen::VectorXd::Zero(d);
  std::vector<double> regrets(K);
  std::vector<Eigen::VectorXd> features(K, Eigen::VectorXd(d));
  std::vector<double> sample(d);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      const double e = sigma * normal(rng);
      sample[i] = y[i] + e;
      features[k](i) = e * e;
    }
    const std::vector<double> z = solve(spec, sample, solver).z;
    regrets[k] = std::abs(best - objective_unchecked(spec, z, y));
    gram.noalias() += features[k] * features[k].transpose();
    xtr += regrets[k] * features[k];
  }

  LodlSurrogate s;
  s.center.assign(y.begin(), y.end());
  s.samples = K;
  const bool flat = std::all_of(regrets.begin(), regrets.end(),
                                [](double r) { return r == 0.0; });
  if (flat) {
    s.weights.assign(d, 0.0);
    s.degenerate = true;
    s.r_squared = 0.0;
    return s;
  }
  s.weights = nnls(gram, xtr);
  double mean_r = 0.0;
  for (double r : regrets) mean_r += r;
  mean_r /= static_cast<double>(K);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double pred = 0.0;
    for (std::size_t i = 0; i < d; ++i) pred += s.weights[i] * features[k](i);
    ss_res += (regrets[k] - pred) * (regrets[k] - pred);
    ss_tot += (regrets[k] - mean_r) * (regrets[k] - mean_r);
  }
  s.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  return s;
}

std::vector<LodlSurrogate> lodl_fit(const std::vector<Instance>& instances,
                                    const ProblemSpec& spec,
                                    const LossConfig& config,
                                    std::uint64_t seed,
                                    const SolverOptions& solver) {
  std::vector<LodlSurrogate> out;
  out.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (i + 1));
    out.push_back(lodl_fit_instance(spec, instances[i].y.values(), config, rng,
                                    solver));
  }
  return out;
}

LossAndGrad lodl_loss(const LodlSurrogate& surrogate,
                      std::span<const double> y_hat) {
  if (y_hat.size() != surrogate.center.size()) {
    throw StateError("lodl_loss: prediction has " + std::to_string(y_hat.size()) +
                     " entries but the surrogate was fitted on " +
                     std::to_string(surrogate.center.size()));
  }
  LossAndGrad out;
  out.grad.resize(y_hat.size());
  for (std::size_t i = 0; i < y_hat.size(); ++i) {
    const double r = y_hat[i] - surrogate.center[i];
    out.loss += surrogate.weights[i] * r * r;
    out.grad[i] = 2.0 * surrogate.weights[i] * r;
  }
  return out;
}

LossAndGrad lodl_loss(const LodlSurrogate& surrogate,
                      std::span<const double> y_hat, std::span<const double> y) {
  if (!std::equal(y.begin(), y.end(), surrogate.center.begin(),
                  surrogate.center.end())) {
    throw StateError("lodl_loss: surrogate belongs to a different instance");
  }
  return lodl_loss(surrogate, y_hat);
}

NodeId lodl_loss_node(Graph& graph, NodeId y_hat) {
  NodeId w = graph.input("lodl_weights");
  NodeId c = graph.input("lodl_center");
  return graph.sum(graph.mul(w, graph.square(graph.sub(y_hat, c))));
}

}  // namespace pno
