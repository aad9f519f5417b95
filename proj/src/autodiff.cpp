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

#include "pno/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "pno/error.hpp"

namespace pno {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kShift: return "shift";
    case OpKind::kRelu: return "relu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kLog: return "log";
    case OpKind::kExp: return "exp";
    case OpKind::kSquare: return "square";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kReshape: return "reshape";
    case OpKind::kBoundary: return "boundary";
  }
  return "?";
}

namespace {

bool is_scalar(const Tensor& t) { return t.rank() == 0; }

// Result shape of an elementwise binary op with scalar broadcasting.
Shape binary_shape(OpKind op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return a.shape();
  if (is_scalar(a)) return b.shape();
  if (is_scalar(b)) return a.shape();
  throw DimensionError(std::string(op_name(op)) + ": shape mismatch " +
                       shape_string(a.shape()) + " vs " +
                       shape_string(b.shape()));
}

template <typename F>
Tensor binary_apply(OpKind op, const Tensor& a, const Tensor& b, F f) {
  Tensor out(binary_shape(op, a, b));
  const bool sa = a.size() == 1 && is_scalar(a);
  const bool sb = b.size() == 1 && is_scalar(b);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = f(a[sa ? 0 : i], b[sb ? 0 : i]);
  }
  return out;
}

// Reduces an elementwise gradient down to the operand's shape (sums over the
// broadcast when the operand is a scalar).
Tensor reduce_to(const Tensor& g, const Tensor& operand) {
  if (operand.shape() == g.shape()) return g;
  double s = 0.0;
  for (double v : g.values()) s += v;
  return Tensor::scalar(s);
}

Tensor matmul_values(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw DimensionError("matmul: incompatible shapes " +
                         shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out(Shape{m, n});
  double* o = out.data().data();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      double* orow = o + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

// a^T * g  (k x m)(m x n) without materialising the transpose.
Tensor matmul_tn(const Tensor& a, const Tensor& g) {
  const std::size_t m = a.rows(), k = a.cols(), n = g.cols();
  Tensor out(Shape{k, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[p * n + j] += av * g[i * n + j];
    }
  }
  return out;
}

// g * b^T  (m x n)(n x k)
Tensor matmul_nt(const Tensor& g, const Tensor& b) {
  const std::size_t m = g.rows(), n = g.cols(), k = b.rows();
  Tensor out(Shape{m, k});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * b[p * n + j];
      out[i * k + p] = s;
    }
  }
  return out;
}

Tensor softmax_values(const Tensor& a, double tau) {
  Tensor out(a.shape());
  double mx = -INFINITY;
  for (double v : a.values()) mx = std::max(mx, v / tau);
  double z = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::exp(a[i] / tau - mx);
    z += out[i];
  }
  for (double& v : out.values()) v /= z;
  return out;
}

}  // namespace

NodeId Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  evaluated_ = false;
  backpropagated_ = false;
  return NodeId{nodes_.size() - 1};
}

void Graph::check(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw StateError("graph: node id " + std::to_string(id.index) +
                     " does not exist");
  }
}

NodeId Graph::input(const std::string& name) {
  Node n{OpKind::kInput};
  n.name = name;
  return push(std::move(n));
}

NodeId Graph::constant(Tensor value) {
  Node n{OpKind::kConstant};
  n.value = std::move(value);
  return push(std::move(n));
}

#define PNO_UNARY(fn, kindv)          \
  NodeId Graph::fn(NodeId a) {        \
    check(a);                         \
    Node n{kindv};                    \
    n.a = a;                          \
    return push(std::move(n));        \
  }

PNO_UNARY(relu, OpKind::kRelu)
PNO_UNARY(sigmoid, OpKind::kSigmoid)
PNO_UNARY(log, OpKind::kLog)
PNO_UNARY(exp, OpKind::kExp)
PNO_UNARY(square, OpKind::kSquare)
PNO_UNARY(sum, OpKind::kSum)
PNO_UNARY(mean, OpKind::kMean)
PNO_UNARY(boundary, OpKind::kBoundary)
#undef PNO_UNARY

#define PNO_BINARY(fn, kindv)           \
  NodeId Graph::fn(NodeId a, NodeId b) { \
    check(a);                           \
    check(b);                           \
    Node n{kindv};                      \
    n.a = a;                            \
    n.b = b;                            \
    return push(std::move(n));          \
  }

PNO_BINARY(matmul, OpKind::kMatmul)
PNO_BINARY(add, OpKind::kAdd)
PNO_BINARY(sub, OpKind::kSub)
PNO_BINARY(mul, OpKind::kMul)
#undef PNO_BINARY

NodeId Graph::scale(NodeId a, double factor) {
  check(a);
  Node n{OpKind::kScale};
  n.a = a;
  n.param = factor;
  return push(std::move(n));
}

NodeId Graph::shift(NodeId a, double offset) {
  check(a);
  Node n{OpKind::kShift};
  n.a = a;
  n.param = offset;
  return push(std::move(n));
}

NodeId Graph::softmax(NodeId a, double tau) {
  check(a);
  if (!(tau > 0.0)) throw ParameterError("softmax: temperature must be > 0");
  Node n{OpKind::kSoftmax};
  n.a = a;
  n.param = tau;
  return push(std::move(n));
}

NodeId Graph::log_softmax(NodeId a, double tau) {
  check(a);
  if (!(tau > 0.0)) throw ParameterError("log_softmax: temperature must be > 0");
  Node n{OpKind::kLogSoftmax};
  n.a = a;
  n.param = tau;
  return push(std::move(n));
}

NodeId Graph::reshape(NodeId a, Shape shape) {
  check(a);
  Node n{OpKind::kReshape};
  n.a = a;
  n.shape = std::move(shape);
  return push(std::move(n));
}

void Graph::set_root(NodeId root) {
  check(root);
  root_ = root;
  backpropagated_ = false;
}

NodeId Graph::root() const {
  if (root_) return *root_;
  if (nodes_.empty()) throw StateError("graph: empty graph has no root");
  return NodeId{nodes_.size() - 1};
}

const Tensor& Graph::forward(const NamedTensors& inputs) {
  if (nodes_.empty()) throw StateError("graph: forward on empty graph");
  for (auto& node : nodes_) {
    const Tensor* a = nullptr;
    const Tensor* b = nullptr;
    switch (node.kind) {
      case OpKind::kInput:
      case OpKind::kConstant:
        break;
      case OpKind::kMatmul:
      case OpKind::kAdd:
      case OpKind::kSub:
      case OpKind::kMul:
        b = &nodes_[node.b.index].value;
        [[fallthrough]];
      default:
        a = &nodes_[node.a.index].value;
    }
    switch (node.kind) {
      case OpKind::kInput: {
        auto it = inputs.find(node.name);
        if (it == inputs.end()) {
          throw StateError("forward: input '" + node.name + "' is not bound");
        }
        node.value = it->second;
        break;
      }
      case OpKind::kConstant:
        break;
      case OpKind::kMatmul:
        node.value = matmul_values(*a, *b);
        break;
      case OpKind::kAdd:
        node.value = binary_apply(node.kind, *a, *b,
                                  [](double x, double y) { return x + y; });
        break;
      case OpKind::kSub:
        node.value = binary_apply(node.kind, *a, *b,
                                  [](double x, double y) { return x - y; });
        break;
      case OpKind::kMul:
        node.value = binary_apply(node.kind, *a, *b,
                                  [](double x, double y) { return x * y; });
        break;
      case OpKind::kScale: {
        node.value = *a;
        for (double& v : node.value.values()) v *= node.param;
        break;
      }
      case OpKind::kShift: {
        node.value = *a;
        for (double& v : node.value.values()) v += node.param;
        break;
      }
      case OpKind::kRelu: {
        node.value = *a;
        for (double& v : node.value.values()) v = v > 0.0 ? v : 0.0;
        break;
      }
      case OpKind::kSigmoid: {
        node.value = *a;
        for (double& v : node.value.values()) {
          v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                       : std::exp(v) / (1.0 + std::exp(v));
        }
        break;
      }
      case OpKind::kLog: {
        node.value = *a;
        for (double& v : node.value.values()) {
          if (!(v > 0.0)) {
            throw NumericError("log: non-positive input " + std::to_string(v));
          }
          v = std::log(v);
        }
        break;
      }
      case OpKind::kExp: {
        node.value = *a;
        for (double& v : node.value.values()) {
          v = std::exp(v);
          if (!std::isfinite(v)) throw NumericError("exp: overflow");
        }
        break;
      }
      case OpKind::kSquare: {
        node.value = *a;
        for (double& v : node.value.values()) v *= v;
        break;
      }
      case OpKind::kSum:
      case OpKind::kMean: {
        double s = 0.0;
        for (double v : a->values()) s += v;
        if (node.kind == OpKind::kMean) {
          if (a->size() == 0) throw NumericError("mean: empty tensor");
          s /= static_cast<double>(a->size());
        }
        node.value = Tensor::scalar(s);
        break;
      }
      case OpKind::kSoftmax:
        if (a->size() == 0) throw DimensionError("softmax: empty tensor");
        node.value = softmax_values(*a, node.param);
        break;
      case OpKind::kLogSoftmax: {
        if (a->size() == 0) throw DimensionError("log_softmax: empty tensor");
        double mx = -INFINITY;
        for (double v : a->values()) mx = std::max(mx, v / node.param);
        double z = 0.0;
        for (double v : a->values()) z += std::exp(v / node.param - mx);
        const double lz = mx + std::log(z);
        node.value = *a;
        for (double& v : node.value.values()) v = v / node.param - lz;
        break;
      }
      case OpKind::kReshape:
        node.value = a->reshaped(node.shape);
        break;
      case OpKind::kBoundary:
        node.value = *a;
        break;
    }
  }
  evaluated_ = true;
  backpropagated_ = false;
  return nodes_[root().index].value;
}

void Graph::inject(NodeId boundary_node, Tensor gradient) {
  check(boundary_node);
  auto& node = nodes_[boundary_node.index];
  if (node.kind != OpKind::kBoundary) {
    throw StateError("inject: node " + std::to_string(boundary_node.index) +
                     " is a " + op_name(node.kind) + ", not a boundary node");
  }
  node.injected = std::move(gradient);
}

void Graph::clear_injections() {
  for (auto& node : nodes_) node.injected.reset();
}

void Graph::accumulate(NodeId id, const Tensor& g) {
  auto& node = nodes_[id.index];
  if (!node.has_grad) {
    node.grad = g;
    node.has_grad = true;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) node.grad[i] += g[i];
}

NamedTensors Graph::backward(const Tensor& seed) {
  if (!evaluated_) throw StateError("backward: forward has not been run");
  const NodeId r = root();
  if (seed.shape() != nodes_[r.index].value.shape()) {
    throw DimensionError("backward: seed shape " + shape_string(seed.shape()) +
                         " does not match root shape " +
                         shape_string(nodes_[r.index].value.shape()));
  }
  for (auto& node : nodes_) node.has_grad = false;
  accumulate(r, seed);

  for (std::size_t idx = r.index + 1; idx-- > 0;) {
    auto& node = nodes_[idx];
    if (node.injected) {
      if (node.injected->shape() != node.value.shape()) {
        throw DimensionError("backward: injected gradient shape " +
                             shape_string(node.injected->shape()) +
                             " does not match boundary node shape " +
                             shape_string(node.value.shape()));
      }
      node.grad = *node.injected;
      node.has_grad = true;
    }
    if (!node.has_grad) continue;
    const Tensor& g = node.grad;
    switch (node.kind) {
      case OpKind::kInput:
      case OpKind::kConstant:
        break;
      case OpKind::kMatmul: {
        const Tensor& a = nodes_[node.a.index].value;
        const Tensor& b = nodes_[node.b.index].value;
        accumulate(node.a, matmul_nt(g, b));
        accumulate(node.b, matmul_tn(a, g));
        break;
      }
      case OpKind::kAdd:
      case OpKind::kSub: {
        const Tensor& a = nodes_[node.a.index].value;
        const Tensor& b = nodes_[node.b.index].value;
        accumulate(node.a, reduce_to(g, a));
        Tensor gb = reduce_to(g, b);
        if (node.kind == OpKind::kSub) {
          for (double& v : gb.values()) v = -v;
        }
        accumulate(node.b, gb);
        break;
      }
      case OpKind::kMul: {
        const Tensor& a = nodes_[node.a.index].value;
        const Tensor& b = nodes_[node.b.index].value;
        Tensor ga = binary_apply(OpKind::kMul, g, b,
                                 [](double x, double y) { return x * y; });
        Tensor gb = binary_apply(OpKind::kMul, g, a,
                                 [](double x, double y) { return x * y; });
        accumulate(node.a, reduce_to(ga, a));
        accumulate(node.b, reduce_to(gb, b));
        break;
      }
      case OpKind::kScale: {
        Tensor ga = g;
        for (double& v : ga.values()) v *= node.param;
        accumulate(node.a, ga);
        break;
      }
      case OpKind::kShift:
      case OpKind::kBoundary:
        accumulate(node.a, g);
        break;
      case OpKind::kReshape:
        accumulate(node.a, g.reshaped(nodes_[node.a.index].value.shape()));
        break;
      case OpKind::kRelu: {
        const Tensor& a = nodes_[node.a.index].value;
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) {
          if (!(a[i] > 0.0)) ga[i] = 0.0;
        }
        accumulate(node.a, ga);
        break;
      }
      case OpKind::kSigmoid: {
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) {
          const double s = node.value[i];
          ga[i] *= s * (1.0 - s);
        }
        accumulate(node.a, ga);
        break;
      }
      case OpKind::kLog: {
        const Tensor& a = nodes_[node.a.index].value;
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] /= a[i];
        accumulate(node.a, ga);
        break;
      }
      case OpKind::kExp: {
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= node.value[i];
        accumulate(node.a, ga);
        break;
      }
      case OpKind::kSquare: {
        const Tensor& a = nodes_[node.a.index].value;
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= 2.0 * a[i];
        accumulate(node.a, ga);
        break;
      }
      case OpKind::kSum:
      case OpKind::kMean: {
        const Tensor& a = nodes_[node.a.index].value;
        double gv = g.item();
        if (node.kind == OpKind::kMean) gv /= static_cast<double>(a.size());
        accumulate(node.a, Tensor(a.shape(), gv));
        break;
      }
      case OpKind::kSoftmax: {
        const Tensor& p = node.value;
        double dot = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) dot += g[i] * p[i];
        Tensor ga(p.shape());
        for (std::size_t i = 0; i < p.size(); ++i) {
          ga[i] = p[i] * (g[i] - dot) / node.param;
        }
        accumulate(node.a, ga);
        break;
      }
      case OpKind::kLogSoftmax: {
        const Tensor& lp = node.value;
        double gs = 0.0;
        for (double v : g.values()) gs += v;
        Tensor ga(lp.shape());
        for (std::size_t i = 0; i < lp.size(); ++i) {
          ga[i] = (g[i] - std::exp(lp[i]) * gs) / node.param;
        }
        accumulate(node.a, ga);
        break;
      }
    }
  }
  backpropagated_ = true;

  NamedTensors out;
  for (auto& node : nodes_) {
    if (node.kind != OpKind::kInput) continue;
    if (!node.has_grad) {
      node.grad = Tensor(node.value.shape());
      node.has_grad = true;
    }
    auto [it, inserted] = out.emplace(node.name, node.grad);
    if (!inserted) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) {
        it->second[i] += node.grad[i];
      }
    }
  }
  return out;
}

const Tensor& Graph::value(NodeId id) const {
  check(id);
  if (!evaluated_) throw StateError("value: forward has not been run");
  return nodes_[id.index].value;
}

const Tensor& Graph::gradient(NodeId id) const {
  check(id);
  if (!backpropagated_) throw StateError("gradient: backward has not been run");
  const auto& node = nodes_[id.index];
  if (!node.has_grad) {
    throw StateError("gradient: node " + std::to_string(id.index) +
                     " is not reachable from the root");
  }
  return node.grad;
}

}  // namespace pno
