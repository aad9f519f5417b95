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

// The coefficient predictor: a ReLU MLP applied row-wise to an instance's
// feature matrix, the prediction-focused losses, and Adam.

#ifndef PNO_PREDICTOR_HPP_
#define PNO_PREDICTOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pno/autodiff.hpp"
#include "pno/tensor.hpp"

namespace pno {

enum class OutputHead { kIdentity, kSigmoid };
enum class PtoLossKind { kMse, kBce };

const char* to_string(OutputHead head);
const char* to_string(PtoLossKind kind);
OutputHead output_head_from_string(const std::string& s);
PtoLossKind pto_loss_from_string(const std::string& s);
/// MSE pairs with an identity head and BCE with a sigmoid head.
OutputHead head_for(PtoLossKind kind);

class MlpModel {
 public:
  /// `widths` = {in, hidden..., out}. Weights are Glorot-uniform from `seed`,
  /// biases start at zero.
  MlpModel(std::vector<std::size_t> widths, OutputHead head,
           std::uint64_t seed);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t input_width() const { return widths_.front(); }
  std::size_t output_width() const { return widths_.back(); }
  std::size_t layer_count() const { return widths_.size() - 1; }
  OutputHead head() const { return head_; }

  /// Parameters in order W0, b0, W1, b1, ...; W_l is (in x out), b_l (1 x out).
  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  const std::vector<std::string>& parameter_names() const { return names_; }

  /// Adds the network to `graph` with the parameters as named inputs.
  NodeId build(Graph& graph, NodeId x) const;
  /// Binds the parameters (and `x` under `x_name`) for Graph::forward.
  NamedTensors bind(const Tensor& x, const std::string& x_name = "x") const;

  nlohmann::json to_json() const;
  static MlpModel from_json(const nlohmann::json& j);

 private:
  MlpModel() = default;
  std::vector<std::size_t> widths_;
  OutputHead head_ = OutputHead::kIdentity;
  std::vector<Tensor> params_;
  std::vector<std::string> names_;
};

/// One output row per input row. Throws DimensionError on a width mismatch.
Tensor predict(const MlpModel& model, const Tensor& x);

double pto_loss(const Tensor& y_hat, const Tensor& y, PtoLossKind kind);
/// Graph form of pto_loss; `y` is typically a constant node.
NodeId pto_loss_node(Graph& graph, NodeId y_hat, NodeId y, PtoLossKind kind);

class AdamState {
 public:
  explicit AdamState(double learning_rate, double beta1 = 0.9,
                     double beta2 = 0.999, double epsilon = 1e-8);

  /// In-place Adam update with bias correction. Throws NumericError naming the
  /// parameter if any gradient entry is not finite; parameters are untouched
  /// in that case.
  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
            const std::vector<std::string>& names = {});

  std::uint64_t step_count() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace pno

#endif  // PNO_PREDICTOR_HPP_
