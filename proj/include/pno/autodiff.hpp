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

// Reverse-mode automatic differentiation over dense tensors.
//
// A Graph is built once as an ordered list of op records. Each record only
// references strictly earlier records, so the insertion order is already a
// topological order: forward() walks it front to back and backward() walks it
// back to front. Leaves are either named inputs (bound at forward time) or
// constants.
//
// Boundary nodes are identity ops whose upstream gradient may be supplied from
// outside the graph. This is how solver-side gradients (interpolated solver
// Jacobians, SPO+ subgradients, KKT products) enter the predictor: when a
// gradient is injected for a boundary node, whatever flowed into it from
// downstream is replaced by the injected tensor.

#ifndef PNO_AUTODIFF_HPP_
#define PNO_AUTODIFF_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pno/tensor.hpp"

namespace pno {

struct NodeId {
  std::size_t index = 0;
  bool operator==(const NodeId&) const = default;
};

enum class OpKind {
  kInput,
  kConstant,
  kMatmul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kShift,
  kRelu,
  kSigmoid,
  kLog,
  kExp,
  kSquare,
  kSum,
  kMean,
  kSoftmax,
  kLogSoftmax,
  kReshape,
  kBoundary,
};

const char* op_name(OpKind kind);

using NamedTensors = std::map<std::string, Tensor>;

class Graph {
 public:
  NodeId input(const std::string& name);
  NodeId constant(Tensor value);

  NodeId matmul(NodeId a, NodeId b);
  /// Elementwise binary ops. Shapes must match, or one side must be a scalar.
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId shift(NodeId a, double offset);
  NodeId relu(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId log(NodeId a);
  NodeId exp(NodeId a);
  NodeId square(NodeId a);
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);
  /// Softmax over all entries of `a` at temperature tau: exp(a/tau)/sum.
  NodeId softmax(NodeId a, double tau);
  NodeId log_softmax(NodeId a, double tau);
  NodeId reshape(NodeId a, Shape shape);
  NodeId boundary(NodeId a);

  /// By default the root is the most recently added node.
  void set_root(NodeId root);
  NodeId root() const;
  std::size_t node_count() const { return nodes_.size(); }
  OpKind kind(NodeId id) const { return nodes_.at(id.index).kind; }

  /// Evaluates every node in order and caches the outputs.
  const Tensor& forward(const NamedTensors& inputs);

  /// Supplies the upstream gradient of a boundary node for the next backward.
  void inject(NodeId boundary_node, Tensor gradient);
  void clear_injections();

  /// Propagates `seed` (shape of the root) back through the graph. Returns
  /// the gradient of every named input; unreachable inputs get zeros.
  NamedTensors backward(const Tensor& seed);

  const Tensor& value(NodeId id) const;
  /// Gradient accumulated at `id` by the last backward.
  const Tensor& gradient(NodeId id) const;

 private:
  struct Node {
    OpKind kind;
    NodeId a{}, b{};
    double param = 0.0;
    Shape shape;  // reshape target
    std::string name;
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    std::optional<Tensor> injected;
  };

  NodeId push(Node node);
  void check(NodeId id) const;
  void accumulate(NodeId id, const Tensor& g);

  std::vector<Node> nodes_;
  std::optional<NodeId> root_;
  bool evaluated_ = false;
  bool backpropagated_ = false;
};

}  // namespace pno

#endif  // PNO_AUTODIFF_HPP_
