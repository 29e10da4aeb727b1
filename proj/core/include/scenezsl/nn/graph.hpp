#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "scenezsl/nn/tensor.hpp"

namespace scenezsl::nn {

/// Handle to a node of a Graph.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape over the handful of ops the model needs: dense layers,
/// ReLU, max-pool over rows, row stacking, and opaque nodes with a supplied
/// vector-Jacobian product. Nodes are appended in evaluation order, so a
/// reverse sweep visits them topologically.
template <typename T>
class Graph {
 public:
  using TensorT = BasicTensor<T>;
  /// Receives the graph and the gradient of the node's output; must add into
  /// the gradients of the node's inputs via accumulate().
  using BackwardFn = std::function<void(Graph&, const TensorT& out_grad)>;

  /// Input that never receives a gradient.
  Var constant(TensorT value);
  /// Input whose gradient is tracked (parameters, or cut points between
  /// graphs).
  Var leaf(TensorT value);

  const TensorT& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient after backward(); all-zero if no path reached the node.
  TensorT grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// y = x * w + b with x: m x k, w: k x n, b: n.
  Var dense(Var x, Var w, Var b);
  Var relu(Var x);
  /// Column-wise max over the rows of x (m x n -> 1 x n). Gradient goes to
  /// the first row attaining the max.
  Var max_over_rows(Var x);
  /// Stacks 1 x n rows into an m x n matrix.
  Var stack_rows(std::span<const Var> rows);
  /// Node with caller-provided value and backward rule.
  Var custom(TensorT value, std::vector<Var> inputs, BackwardFn backward);

  /// Adds g into the gradient of v (no-op for constants).
  void accumulate(Var v, const TensorT& g);

  /// Reverse sweep from `root` seeded with `seed` (same shape as root).
  void backward(Var root, const TensorT& seed);
  /// Scalar root with seed 1.
  void backward(Var root);

 private:
  struct Node {
    TensorT value;
    TensorT grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  Var push(TensorT value, bool requires_grad, BackwardFn backward);
  bool any_requires_grad(std::initializer_list<Var> vars) const;

  std::vector<Node> nodes_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace scenezsl::nn
