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

// Decision-focused training signals.
//
// Sign convention: every formula is stated for the cost F(z, y) = s * f(z, y)
// with s = spec.cost_sign() (+1 minimize, -1 maximize), so "z*" is always
// argmin F. A cost-space gradient dL/dc is mapped back to the coefficients
// as dL/dy = s * dL/dc. For minimize-sense problems every formula therefore
// reads exactly as written in cost form.

#ifndef PNO_LOSSES_HPP_
#define PNO_LOSSES_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pno/autodiff.hpp"
#include "pno/predictor.hpp"
#include "pno/problem.hpp"
#include "pno/qp.hpp"
#include "pno/solvers.hpp"

namespace pno {

enum class Method {
  kTwoStage,
  kDfl,
  kBlackbox,
  kIdentity,
  kPerturb,
  kImle,
  kSpoPlus,
  kQptl,
  kNce,
  kLtrPointwise,
  kLtrPairwise,
  kLtrListwise,
  kLodl,
};

enum class MethodCategory { kPto, kDiscrete, kContinuous, kStatistical, kSurrogate };

const char* to_string(Method method);
Method method_from_string(const std::string& s);
MethodCategory category(Method method);
std::vector<Method> all_methods();

struct LossConfig {
  Method method = Method::kTwoStage;
  PtoLossKind pto_loss = PtoLossKind::kMse;
  double interp_lambda = 10.0;   // blackbox and I-MLE smoothing
  double temperature = 1.0;      // listwise softmax
  double margin = 0.1;           // pairwise hinge
  double noise_scale = 1.0;      // perturb / I-MLE Gaussian noise
  int perturb_samples = 1;
  double qp_gamma = 0.1;         // QPTL squared-norm weight
  int lodl_samples = 5000;
  double lodl_noise_fraction = 0.1;  // sigma = fraction * std(y)
  std::optional<double> lodl_noise;  // absolute sigma, overrides the fraction
  double cache_growth = 0.0;     // probability of inserting z(y_hat) per step
  bool spo_relax = true;         // relaxed knapsack inside SPO+

  /// Throws ConfigError on a nonpositive required field.
  void validate() const;
  nlohmann::json to_json() const;
  static LossConfig from_json(const nlohmann::json& j);
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;  // dL/dy_hat
};

/// Gradient of F(z_hat, y_hat) with respect to y_hat at fixed z_hat: the
/// derivative of -DQ evaluated on the predicted coefficients. Equals -z_hat
/// for maximize-sense bilinear problems.
std::vector<double> dfl_gradient(const ProblemSpec& spec,
                                 std::span<const double> y_hat,
                                 std::span<const double> z_hat);

enum class InterpVariant { kBlackbox, kIdentity, kPerturb, kImle };

/// Interpolated solver gradients, in cost form:
///   blackbox  (1/lambda) [z*(c + lambda g) - z*(c)]
///   identity  -g
///   perturb   z*(y) - z*(c + R)      (mean over noise draws)
///   imle      z*(c + lambda g + R) - z*(c + R)
/// with c the predicted cost, g = dL/dz and R ~ N(0, noise_scale^2 I).
/// The perturb row is the Fenchel-Young gradient; for maximize-sense
/// problems it reads z(y_hat + R) - z(y) in coefficient space.
/// `y_true` is read by perturb only. Requires decision and coefficient sizes
/// to agree (not budget allocation or scheduling).
std::vector<double> discrete_interp_gradient(
    InterpVariant variant, const ProblemSpec& spec,
    std::span<const double> y_hat, std::span<const double> dl_dz,
    std::span<const double> y_true, const LossConfig& config,
    std::mt19937_64& rng, const SolverOptions& solver = {});

/// SPO+ in cost form:
///   L = -F(z*(2c - y), 2c - y) + 2 F(z*(y), c) - F(z*(y), y)
/// with the Danskin subgradient. `z_true` may carry a precomputed z*(y).
LossAndGrad spo_plus_loss(const ProblemSpec& spec,
                          std::span<const double> y_hat,
                          std::span<const double> y,
                          const SolverOptions& solver = {},
                          const std::vector<double>* z_true = nullptr);

/// Quadratic-regularized relaxation
///   argmin_z F(z, y_hat) + gamma ||z||^2   over the relaxed polytope.
struct QptlResult {
  std::vector<double> z;
  QpProblem problem;
  QpSolution solution;
};
/// Throws UnsupportedError for budget allocation and scheduling.
QpProblem qptl_problem(const ProblemSpec& spec, std::span<const double> y_hat,
                       double gamma);
QptlResult qptl_forward(const ProblemSpec& spec, std::span<const double> y_hat,
                        double gamma);
/// dL/dy_hat from dL/dz through the KKT system of the active set.
std::vector<double> qptl_backward(const ProblemSpec& spec,
                                  const QptlResult& forward,
                                  std::span<const double> dl_dz);

enum class CacheOrigin { kInstanceOptimum, kTraining };

class SolutionCache {
 public:
  SolutionCache() = default;
  explicit SolutionCache(std::size_t decision_size)
      : decision_size_(decision_size) {}

  /// Inserts `z` unless an identical decision is present. Returns whether it
  /// was inserted. Throws DimensionError on a size mismatch.
  bool add(const std::vector<double>& z, CacheOrigin origin);
  /// Index of `z` in the cache, if present.
  std::optional<std::size_t> find(const std::vector<double>& z) const;

  std::size_t size() const { return solutions_.size(); }
  bool empty() const { return solutions_.empty(); }
  std::size_t decision_size() const { return decision_size_; }
  const std::vector<std::vector<double>>& solutions() const { return solutions_; }
  const std::vector<CacheOrigin>& origins() const { return origins_; }

  nlohmann::json to_json() const;
  static SolutionCache from_json(const nlohmann::json& j);

 private:
  std::size_t decision_size_ = 0;
  std::vector<std::vector<double>> solutions_;
  std::vector<CacheOrigin> origins_;
  std::set<std::vector<double>> keys_;
};

/// One z*(y_i) per instance, deduplicated. Throws UnsupportedError when
/// instances disagree on the coefficient size.
SolutionCache build_solution_cache(const std::vector<Instance>& instances,
                                   const ProblemSpec& spec,
                                   const SolverOptions& solver = {});
/// Fills the cache with precomputed optima (same rules as above).
SolutionCache build_solution_cache(
    const std::vector<std::vector<double>>& optima, const ProblemSpec& spec);

enum class StatVariant { kNce, kPointwise, kPairwise, kListwise };

/// Per-instance constant consumed by statistical_loss_node under the input
/// name "stat_target":
///   nce        1 x S row  s * (|S| e_star - 1)
///   pointwise  S x 1      f(z_s, y)
///   pairwise   S x S      1 where F(z_p, y) < F(z_q, y)
///   listwise   S x 1      log p_tau(z_s | y)
/// `star` is the cache index of z*(y) (nce only).
Tensor statistical_target(StatVariant variant, const ProblemSpec& spec,
                          const SolutionCache& cache, std::span<const double> y,
                          std::size_t star, const LossConfig& config);

/// Adds the loss to `graph` given the predicted coefficients node:
///   nce        sum_s F(z*, y_hat) - F(z_s, y_hat)
///   pointwise  1/|S| sum_s (f(z_s, y_hat) - f(z_s, y))^2
///   pairwise   sum_{F(z_p,y) < F(z_q,y)} max(0, margin + F(z_p,y_hat) - F(z_q,y_hat))
///   listwise   1/|S| KL(p_tau(.|y) || p_tau(.|y_hat)), p_tau(z|y) ~ exp(-F(z,y)/tau)
/// Throws StateError on an empty cache.
NodeId statistical_loss_node(Graph& graph, StatVariant variant,
                             const ProblemSpec& spec, const SolutionCache& cache,
                             NodeId y_hat, const LossConfig& config);

/// Stand-alone evaluation with exact gradient. z*(y) is computed and appended
/// to a copy of the cache when absent.
LossAndGrad statistical_loss(StatVariant variant, const ProblemSpec& spec,
                             std::span<const double> y_hat,
                             std::span<const double> y,
                             const SolutionCache& cache,
                             const LossConfig& config,
                             const SolverOptions& solver = {});

struct LodlSurrogate {
  std::vector<double> center;   // the instance's true y
  std::vector<double> weights;  // >= 0
  double r_squared = 0.0;
  std::size_t samples = 0;
  bool degenerate = false;      // every sampled regret was zero

  nlohmann::json to_json() const;
  static LodlSurrogate from_json(const nlohmann::json& j);
};

/// Samples y_k = y + sigma N(0, I), records regret(y_k, y) and fits
/// sum_d w_d (y_hat_d - y_d)^2 by nonnegative least squares.
LodlSurrogate lodl_fit_instance(const ProblemSpec& spec,
                                std::span<const double> y,
                                const LossConfig& config, std::mt19937_64& rng,
                                const SolverOptions& solver = {});
std::vector<LodlSurrogate> lodl_fit(const std::vector<Instance>& instances,
                                    const ProblemSpec& spec,
                                    const LossConfig& config,
                                    std::uint64_t seed,
                                    const SolverOptions& solver = {});

/// sum_d w_d (y_hat_d - center_d)^2. The second overload also checks that
/// `y` is the instance the surrogate was fitted on (StateError otherwise).
LossAndGrad lodl_loss(const LodlSurrogate& surrogate,
                      std::span<const double> y_hat);
LossAndGrad lodl_loss(const LodlSurrogate& surrogate,
                      std::span<const double> y_hat, std::span<const double> y);
/// Graph form reading the inputs "lodl_weights" and "lodl_center" (both of
/// the shape of `y_hat`).
NodeId lodl_loss_node(Graph& graph, NodeId y_hat);

/// Nonnegative least squares min ||Xw - r|| s.t. w >= 0 (Lawson-Hanson),
/// solved on the normal equations.
std::vector<double> nnls(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xtr);

}  // namespace pno

#endif  // PNO_LOSSES_HPP_
