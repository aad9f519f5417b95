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

#include "pno/predictor.hpp"

#include <cmath>
#include <random>

#include "pno/error.hpp"

namespace pno {

const char* to_string(OutputHead head) {
  return head == OutputHead::kSigmoid ? "sigmoid" : "identity";
}

const char* to_string(PtoLossKind kind) {
  return kind == PtoLossKind::kBce ? "bce" : "mse";
}

OutputHead output_head_from_string(const std::string& s) {
  if (s == "identity") return OutputHead::kIdentity;
  if (s == "sigmoid") return OutputHead::kSigmoid;
  throw ParameterError("unknown output head '" + s + "'");
}

PtoLossKind pto_loss_from_string(const std::string& s) {
  if (s == "mse") return PtoLossKind::kMse;
  if (s == "bce") return PtoLossKind::kBce;
  throw ParameterError("unknown prediction loss '" + s + "'");
}

OutputHead head_for(PtoLossKind kind) {
  return kind == PtoLossKind::kBce ? OutputHead::kSigmoid
                                   : OutputHead::kIdentity;
}

MlpModel::MlpModel(std::vector<std::size_t> widths, OutputHead head,
                   std::uint64_t seed)
    : widths_(std::move(widths)), head_(head) {
  if (widths_.size() < 2) {
    throw ParameterError("mlp: need at least input and output widths");
  }
  for (auto w : widths_) {
    if (w == 0) throw ParameterError("mlp: zero layer width");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const std::size_t fan_in = widths_[l], fan_out = widths_[l + 1];
    const double bound =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor w(Shape{fan_in, fan_out});
    for (double& v : w.values()) v = dist(rng);
    params_.push_back(std::move(w));
    params_.emplace_back(Shape{1, fan_out});
    names_.push_back("W" + std::to_string(l));
    names_.push_back("b" + std::to_string(l));
  }
}

NodeId MlpModel::build(Graph& graph, NodeId x) const {
  NodeId h = x;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    NodeId w = graph.input(names_[2 * l]);
    NodeId b = graph.input(names_[2 * l + 1]);
    // Bias rows are spread with an explicit ones column; no implicit
    // broadcasting in the graph.
    NodeId ones = graph.input("__ones");
    h = graph.add(graph.matmul(h, w), graph.matmul(ones, b));
    if (l + 1 < layer_count()) {
      h = graph.relu(h);
    } else if (head_ == OutputHead::kSigmoid) {
      h = graph.sigmoid(h);
    }
  }
  return h;
}

NamedTensors MlpModel::bind(const Tensor& x, const std::string& x_name) const {
  NamedTensors inputs;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    inputs.emplace(names_[i], params_[i]);
  }
  inputs.emplace("__ones", Tensor(Shape{x.rows(), 1}, 1.0));
  inputs.emplace(x_name, x);
  return inputs;
}

nlohmann::json MlpModel::to_json() const {
  nlohmann::json j;
  j["widths"] = widths_;
  j["head"] = to_string(head_);
  auto& weights = j["weights"] = nlohmann::json::array();
  auto& biases = j["biases"] = nlohmann::json::array();
  for (std::size_t l = 0; l < layer_count(); ++l) {
    weights.push_back(params_[2 * l].values());
    biases.push_back(params_[2 * l + 1].values());
  }
  return j;
}

MlpModel MlpModel::from_json(const nlohmann::json& j) {
  MlpModel m;
  try {
    m.widths_ = j.at("widths").get<std::vector<std::size_t>>();
    m.head_ = output_head_from_string(j.at("head").get<std::string>());
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (m.widths_.size() < 2 || weights.size() != m.widths_.size() - 1 ||
        biases.size() != weights.size()) {
      throw SchemaError("mlp checkpoint: layer count mismatch");
    }
    for (std::size_t l = 0; l + 1 < m.widths_.size(); ++l) {
      m.params_.emplace_back(Shape{m.widths_[l], m.widths_[l + 1]},
                             weights[l].get<std::vector<double>>());
      m.params_.emplace_back(Shape{1, m.widths_[l + 1]},
                             biases[l].get<std::vector<double>>());
      m.names_.push_back("W" + std::to_string(l));
      m.names_.push_back("b" + std::to_string(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("mlp checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw SchemaError(std::string("mlp checkpoint: ") + e.what());
  }
  return m;
}

Tensor predict(const MlpModel& model, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != model.input_width()) {
    throw DimensionError("predict: features have shape " +
                         shape_string(x.shape()) + " but the model expects " +
                         std::to_string(model.input_width()) + " columns");
  }
  const auto& params = model.parameters();
  Tensor h = x;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const Tensor& w = params[2 * l];
    const Tensor& b = params[2 * l + 1];
    const std::size_t rows = h.rows(), in = w.rows(), out = w.cols();
    Tensor next(Shape{rows, out});
    for (std::size_t r = 0; r < rows; ++r) {
      double* o = &next[r * out];
      for (std::size_t j = 0; j < out; ++j) o[j] = b[j];
      for (std::size_t k = 0; k < in; ++k) {
        const double hv = h[r * in + k];
        if (hv == 0.0) continue;
        const double* wr = w.values().data() + k * out;
        for (std::size_t j = 0; j < out; ++j) o[j] += hv * wr[j];
      }
    }
    const bool last = l + 1 == model.layer_count();
    for (double& v : next.values()) {
      if (!last) {
        v = v > 0.0 ? v : 0.0;
      } else if (model.head() == OutputHead::kSigmoid) {
        v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                     : std::exp(v) / (1.0 + std::exp(v));
      }
    }
    h = std::move(next);
  }
  return h;
}

double pto_loss(const Tensor& y_hat, const Tensor& y, PtoLossKind kind) {
  if (y_hat.size() != y.size()) {
    throw DimensionError("pto_loss: shape mismatch " +
                         shape_string(y_hat.shape()) + " vs " +
                         shape_string(y.shape()));
  }
  if (y.size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (kind == PtoLossKind::kMse) {
      const double r = y_hat[i] - y[i];
      s += r * r;
    } else {
      const double p = y_hat[i];
      if (!(p > 0.0 && p < 1.0)) {
        throw NumericError("pto_loss: BCE prediction " + std::to_string(p) +
                           " outside (0,1)");
      }
      s -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
    }
  }
  return s / static_cast<double>(y.size());
}

NodeId pto_loss_node(Graph& graph, NodeId y_hat, NodeId y, PtoLossKind kind) {
  if (kind == PtoLossKind::kMse) {
    return graph.mean(graph.square(graph.sub(y_hat, y)));
  }
  // -(y log p + (1 - y) log(1 - p)), with p squeezed into [1e-12, 1 - 1e-12]
  // so a saturated sigmoid does not produce log(0) during training.
  constexpr double kEps = 1e-12;
  NodeId p = graph.shift(graph.scale(y_hat, 1.0 - 2.0 * kEps), kEps);
  NodeId log_p = graph.log(p);
  NodeId log_q = graph.log(graph.shift(graph.scale(p, -1.0), 1.0));
  NodeId one_minus_y = graph.shift(graph.scale(y, -1.0), 1.0);
  NodeId ll = graph.add(graph.mul(y, log_p), graph.mul(one_minus_y, log_q));
  return graph.scale(graph.mean(ll), -1.0);
}

AdamState::AdamState(double learning_rate, double beta1, double beta2,
                     double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  if (!(learning_rate > 0.0)) {
    throw ParameterError("adam: learning rate must be > 0");
  }
}

void AdamState::step(std::vector<Tensor>& params,
                     const std::vector<Tensor>& grads,
                     const std::vector<std::string>& names) {
  if (params.size() != grads.size()) {
    throw DimensionError("adam: parameter/gradient count mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].shape() != params[i].shape()) {
      throw DimensionError("adam: gradient shape mismatch for parameter " +
                           (i < names.size() ? names[i] : std::to_string(i)));
    }
    if (!grads[i].all_finite()) {
      throw NumericError("adam: non-finite gradient for parameter " +
                         (i < names.size() ? names[i] : std::to_string(i)));
    }
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.shape());
      v_.emplace_back(p.shape());
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    const auto& g = grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
      const double mh = m[k] / bc1;
      const double vh = v[k] / bc2;
      p[k] -= lr_ * mh / (std::sqrt(vh) + eps_);
    }
  }
}

}  // namespace pno
