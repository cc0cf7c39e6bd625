// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <unordered_set>

#include "kermod/errors.hpp"

namespace kermod::ad {

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // sized iff requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward_rule;
};

struct Access {
  static Tensor wrap(std::shared_ptr<Node> node) { return Tensor(std::move(node)); }
  static const std::shared_ptr<Node>& node(const Tensor& t) { return t.node_; }
};

}  // namespace detail

using detail::Access;
using detail::Node;

namespace {

std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  require_defined(t, op);
  if (t.shape().size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(t.shape()));
  }
}

Tensor make_leaf(Shape shape, std::vector<double> data, bool requires_grad) {
  if (element_count(shape) != data.size()) {
    throw DimensionError("tensor: shape " + shape_string(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->data.size(), 0.0);
  return Access::wrap(std::move(node));
}

// Creates an op output. The rule runs only when some input tracks gradients.
Tensor make_op(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
               std::function<void(Node&)> rule) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  for (const auto& in : inputs) {
    node->requires_grad = node->requires_grad || in.requires_grad();
    node->inputs.push_back(Access::node(in));
  }
  if (node->requires_grad) {
    node->grad.assign(node->data.size(), 0.0);
    node->backward_rule = std::move(rule);
  }
  return Access::wrap(std::move(node));
}

Node* raw(const Tensor& t) { return Access::node(t).get(); }

}  // namespace

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor Tensor::constant(Shape shape, std::vector<double> data) {
  return make_leaf(std::move(shape), std::move(data), false);
}

Tensor Tensor::parameter(Shape shape, std::vector<double> data) {
  return make_leaf(std::move(shape), std::move(data), true);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = element_count(shape);
  return make_leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return make_leaf({}, {value}, requires_grad); }

Tensor Tensor::from_matrix(const Matrix& m, bool requires_grad) {
  return make_leaf({m.rows, m.cols}, m.values, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->data.size(); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= node_->shape.size()) throw DimensionError("tensor: axis out of range");
  return node_->shape[axis];
}

std::span<const double> Tensor::data() const { return node_->data; }
std::span<double> Tensor::mutable_data() { return node_->data; }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return node_->inputs.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }
std::span<double> Tensor::mutable_grad() { return node_->grad; }
void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

double Tensor::item() const {
  if (node_->data.size() != 1) throw DimensionError("item: tensor holds " + std::to_string(size()) + " values");
  return node_->data[0];
}

Matrix Tensor::to_matrix() const {
  if (shape().size() != 2) throw DimensionError("to_matrix: expected rank 2, got " + shape_string(shape()));
  return Matrix(shape()[0], shape()[1], node_->data);
}

Tensor Tensor::detach() const { return make_leaf(node_->shape, node_->data, false); }

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank(x, 2, "affine");
  require_rank(w, 2, "affine");
  require_rank(b, 1, "affine");
  const std::size_t n = x.dim(0), din = x.dim(1), dout = w.dim(1);
  if (w.dim(0) != din || b.dim(0) != dout) {
    throw DimensionError("affine: x " + shape_string(x.shape()) + ", W " + shape_string(w.shape()) + ", b " +
                         shape_string(b.shape()));
  }
  const auto xd = x.data(), wd = w.data(), bd = b.data();
  std::vector<double> out(n * dout);
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out.data() + i * dout;
    std::copy(bd.begin(), bd.end(), o);
    for (std::size_t k = 0; k < din; ++k) {
      const double xv = xd[i * din + k];
      if (xv == 0.0) continue;
      const double* wr = wd.data() + k * dout;
      for (std::size_t j = 0; j < dout; ++j) o[j] += xv * wr[j];
    }
  }
  Node* xn = raw(x);
  Node* wn = raw(w);
  Node* bn = raw(b);
  return make_op({n, dout}, std::move(out), {x, w, b}, [=](Node& self) {
    const double* g = self.grad.data();
    if (xn->requires_grad) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < din; ++k) {
          double acc = 0.0;
          const double* wr = wn->data.data() + k * dout;
          for (std::size_t j = 0; j < dout; ++j) acc += g[i * dout + j] * wr[j];
          xn->grad[i * din + k] += acc;
        }
    }
    if (wn->requires_grad) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < din; ++k) {
          const double xv = xn->data[i * din + k];
          if (xv == 0.0) continue;
          double* gw = wn->grad.data() + k * dout;
          for (std::size_t j = 0; j < dout; ++j) gw[j] += xv * g[i * dout + j];
        }
    }
    if (bn->requires_grad) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dout; ++j) bn->grad[j] += g[i * dout + j];
    }
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t n = a.dim(0), m = a.dim(1), p = b.dim(1);
  if (b.dim(0) != m) {
    throw DimensionError("matmul: " + shape_string(a.shape()) + " by " + shape_string(b.shape()));
  }
  const auto ad = a.data(), bd = b.data();
  std::vector<double> out(n * p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      const double av = ad[i * m + k];
      for (std::size_t j = 0; j < p; ++j) out[i * p + j] += av * bd[k * p + j];
    }
  Node* an = raw(a);
  Node* bn = raw(b);
  return make_op({n, p}, std::move(out), {a, b}, [=](Node& self) {
    const double* g = self.grad.data();
    if (an->requires_grad) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k) {
          double acc = 0.0;
          for (std::size_t j = 0; j < p; ++j) acc += g[i * p + j] * bn->data[k * p + j];
          an->grad[i * m + k] += acc;
        }
    }
    if (bn->requires_grad) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k) {
          const double av = an->data[i * m + k];
          for (std::size_t j = 0; j < p; ++j) bn->grad[k * p + j] += av * g[i * p + j];
        }
    }
  });
}

Tensor gram(const Tensor& x) {
  require_rank(x, 2, "gram");
  const std::size_t n = x.dim(0), d = x.dim(1);
  const auto xd = x.data();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += xd[i * d + k] * xd[j * d + k];
      out[i * n + j] = acc;
      out[j * n + i] = acc;
    }
  Node* xn = raw(x);
  return make_op({n, n}, std::move(out), {x}, [=](Node& self) {
    // d/dx_i = sum_j (G_ij + G_ji) x_j
    const double* g = self.grad.data();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double c = g[i * n + j] + g[j * n + i];
        if (c == 0.0) continue;
        for (std::size_t k = 0; k < d; ++k) xn->grad[i * d + k] += c * xn->data[j * d + k];
      }
  });
}

Tensor elementwise(const Tensor& x, Activation kind) {
  require_defined(x, "elementwise");
  const auto xd = x.data();
  std::vector<double> out(xd.size());
  std::transform(xd.begin(), xd.end(), out.begin(), [kind](double v) { return activate(kind, v); });
  Node* xn = raw(x);
  return make_op(x.shape(), std::move(out), {x}, [=](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      xn->grad[i] += self.grad[i] * activate_derivative(kind, xn->data[i]);
  });
}

Tensor unit_normalize(const Tensor& x, double epsilon) {
  require_rank(x, 2, "unit_normalize");
  if (!(epsilon > 0.0)) throw ContractError("unit_normalize: epsilon must be positive");
  const std::size_t n = x.dim(0), d = x.dim(1);
  const auto xd = x.data();
  std::vector<double> out(n * d);
  std::vector<double> denom(n);
  std::vector<bool> floored(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double nr = norm(xd.subspan(i * d, d));
    floored[i] = nr < epsilon;
    denom[i] = floored[i] ? epsilon : nr;
    for (std::size_t k = 0; k < d; ++k) out[i * d + k] = xd[i * d + k] / denom[i];
  }
  Node* xn = raw(x);
  std::vector<double> y = out;
  return make_op({n, d}, std::move(out), {x}, [=](Node& self) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* g = self.grad.data() + i * d;
      double* gx = xn->grad.data() + i * d;
      if (floored[i]) {
        for (std::size_t k = 0; k < d; ++k) gx[k] += g[k] / denom[i];
        continue;
      }
      // J = (I - y y^T) / ||x||
      double gy = 0.0;
      for (std::size_t k = 0; k < d; ++k) gy += g[k] * y[i * d + k];
      for (std::size_t k = 0; k < d; ++k) gx[k] += (g[k] - gy * y[i * d + k]) / denom[i];
    }
  });
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  const auto xd = x.data();
  const double total = std::accumulate(xd.begin(), xd.end(), 0.0);
  Node* xn = raw(x);
  return make_op({}, {total}, {x}, [=](Node& self) {
    for (double& g : xn->grad) g += self.grad[0];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  if (a.shape() != b.shape()) {
    throw DimensionError("add: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  Node* an = raw(a);
  Node* bn = raw(b);
  return make_op(a.shape(), std::move(out), {a, b}, [=](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (an->requires_grad) an->grad[i] += self.grad[i];
      if (bn->requires_grad) bn->grad[i] += self.grad[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  require_defined(x, "scale");
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v *= factor;
  Node* xn = raw(x);
  return make_op(x.shape(), std::move(out), {x}, [=](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) xn->grad[i] += factor * self.grad[i];
  });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_rank(logits, 2, "softmax_cross_entropy");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  if (labels.size() != n) throw DimensionError("softmax_cross_entropy: label count does not match rows");
  if (n == 0) throw ContractError("softmax_cross_entropy: empty batch");
  const auto z = logits.data();
  std::vector<double> probs(n * c);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= c) throw ContractError("softmax_cross_entropy: label out of range");
    const double* zi = z.data() + i * c;
    const double zmax = *std::max_element(zi, zi + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      probs[i * c + j] = std::exp(zi[j] - zmax);
      s += probs[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] /= s;
    total += zmax + std::log(s) - zi[y];
  }
  std::vector<int> ys(labels.begin(), labels.end());
  Node* zn = raw(logits);
  return make_op({}, {total / static_cast<double>(n)}, {logits}, [=](Node& self) {
    const double g = self.grad[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        const double target = (static_cast<int>(j) == ys[i]) ? 1.0 : 0.0;
        zn->grad[i * c + j] += g * (probs[i * c + j] - target);
      }
  });
}

Tensor scalar_objective(const Tensor& x, double value, std::vector<double> grad_wrt_x) {
  require_defined(x, "scalar_objective");
  if (grad_wrt_x.size() != x.size()) throw DimensionError("scalar_objective: gradient size mismatch");
  Node* xn = raw(x);
  return make_op({}, {value}, {x}, [=, g = std::move(grad_wrt_x)](Node& self) {
    for (std::size_t i = 0; i < g.size(); ++i) xn->grad[i] += self.grad[0] * g[i];
  });
}

void backward(const Tensor& loss) {
  require_defined(loss, "backward");
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " + shape_string(loss.shape()));
  }
  Node* root = raw(loss);
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs before users).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order)
    if (!node->inputs.empty()) std::fill(node->grad.begin(), node->grad.end(), 0.0);
  if (root->inputs.empty()) {
    root->grad[0] += 1.0;
    return;
  }
  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_rule) (*it)->backward_rule(**it);
}

}  // namespace kermod::ad
