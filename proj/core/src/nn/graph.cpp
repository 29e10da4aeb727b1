#include "scenezsl/nn/graph.hpp"

namespace scenezsl::nn {

template <typename T>
Var Graph<T>::push(TensorT value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), {}, requires_grad, false, std::move(backward)});
  return Var{nodes_.size() - 1};
}

template <typename T>
bool Graph<T>::any_requires_grad(std::initializer_list<Var> vars) const {
  for (Var v : vars) {
    if (nodes_[v.id].requires_grad) return true;
  }
  return false;
}

template <typename T>
Var Graph<T>::constant(TensorT value) {
  return push(std::move(value), false, nullptr);
}

template <typename T>
Var Graph<T>::leaf(TensorT value) {
  return push(std::move(value), true, nullptr);
}

template <typename T>
typename Graph<T>::TensorT Graph<T>::grad(Var v) const {
  const Node& node = nodes_[v.id];
  if (node.has_grad) return node.grad;
  return TensorT(node.value.shape());
}

template <typename T>
void Graph<T>::accumulate(Var v, const TensorT& g) {
  Node& node = nodes_[v.id];
  if (!node.requires_grad) return;
  if (g.size() != node.value.size()) {
    throw NnError(NnErrc::kShapeMismatch, "gradient " + shape_string(g.shape()) +
                                              " for value " + shape_string(node.value.shape()));
  }
  if (!node.has_grad) {
    node.grad = TensorT(node.value.shape(), std::vector<T>(g.data().begin(), g.data().end()));
    node.has_grad = true;
    return;
  }
  auto dst = node.grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
Var Graph<T>::dense(Var x, Var w, Var b) {
  const TensorT& xv = value(x);
  const TensorT& wv = value(w);
  const TensorT& bv = value(b);
  if (xv.cols() != wv.rows() || bv.size() != wv.cols()) {
    throw NnError(NnErrc::kShapeMismatch, "dense " + shape_string(xv.shape()) + " * " +
                                              shape_string(wv.shape()) + " + " +
                                              shape_string(bv.shape()));
  }
  TensorT y = matmul(xv, wv);
  const std::size_t n = y.cols();
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t j = 0; j < n; ++j) row[j] += bv[j];
  }
  const bool track = any_requires_grad({x, w, b});
  return push(std::move(y), track, [x, w, b](Graph& g, const TensorT& dy) {
    if (g.requires_grad(w)) g.accumulate(w, matmul_tn(g.value(x), dy));
    if (g.requires_grad(b)) g.accumulate(b, column_sums(dy));
    if (g.requires_grad(x)) g.accumulate(x, matmul_nt(dy, g.value(w)));
  });
}

template <typename T>
Var Graph<T>::relu(Var x) {
  TensorT y = value(x);
  for (T& v : y.data()) v = v > T{0} ? v : T{0};
  const bool track = any_requires_grad({x});
  const Var out{nodes_.size()};
  return push(std::move(y), track, [x, out](Graph& g, const TensorT& dy) {
    TensorT dx = dy;
    const TensorT& y = g.value(out);
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (!(y[i] > T{0})) dx[i] = T{0};
    }
    g.accumulate(x, dx);
  });
}

template <typename T>
Var Graph<T>::max_over_rows(Var x) {
  const TensorT& xv = value(x);
  const std::size_t m = xv.rows(), n = xv.cols();
  if (m == 0) throw NnError(NnErrc::kShapeMismatch, "max over zero rows");
  TensorT y(Shape{1, n});
  std::vector<std::uint32_t> argmax(n, 0);
  for (std::size_t j = 0; j < n; ++j) y[j] = xv.at(0, j);
  for (std::size_t r = 1; r < m; ++r) {
    auto row = xv.row(r);
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] > y[j]) {
        y[j] = row[j];
        argmax[j] = static_cast<std::uint32_t>(r);
      }
    }
  }
  const bool track = any_requires_grad({x});
  return push(std::move(y), track, [x, argmax = std::move(argmax), m](Graph& g, const TensorT& dy) {
    const std::size_t n = argmax.size();
    TensorT dx(Shape{m, n});
    for (std::size_t j = 0; j < n; ++j) dx.at(argmax[j], j) = dy[j];
    g.accumulate(x, dx);
  });
}

template <typename T>
Var Graph<T>::stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw NnError(NnErrc::kShapeMismatch, "stack of zero rows");
  const std::size_t n = value(rows[0]).size();
  TensorT y(Shape{rows.size(), n});
  bool track = false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const TensorT& rv = value(rows[r]);
    if (rv.size() != n) {
      throw NnError(NnErrc::kShapeMismatch, "stack of rows with different widths");
    }
    std::copy(rv.data().begin(), rv.data().end(), y.row(r).begin());
    track = track || requires_grad(rows[r]);
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return push(std::move(y), track, [inputs = std::move(inputs), n](Graph& g, const TensorT& dy) {
    for (std::size_t r = 0; r < inputs.size(); ++r) {
      if (!g.requires_grad(inputs[r])) continue;
      auto src = dy.row(r);
      g.accumulate(inputs[r], TensorT(g.value(inputs[r]).shape(), std::vector<T>(src.begin(), src.end())));
    }
  });
}

template <typename T>
Var Graph<T>::custom(TensorT value, std::vector<Var> inputs, BackwardFn backward) {
  bool track = false;
  for (Var v : inputs) track = track || requires_grad(v);
  return push(std::move(value), track, std::move(backward));
}

template <typename T>
void Graph<T>::backward(Var root, const TensorT& seed) {
  if (seed.size() != nodes_[root.id].value.size()) {
    throw NnError(NnErrc::kShapeMismatch, "backward seed " + shape_string(seed.shape()) +
                                              " for root " + shape_string(nodes_[root.id].value.shape()));
  }
  if (!nodes_[root.id].requires_grad) return;
  accumulate(root, seed);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || !node.has_grad || !node.backward) continue;
    // Callbacks only write to gradients of earlier nodes; nodes_ never grows here.
    node.backward(*this, node.grad);
  }
}

template <typename T>
void Graph<T>::backward(Var root) {
  TensorT seed(nodes_[root.id].value.shape(), T{1});
  backward(root, seed);
}

template class Graph<float>;
template class Graph<double>;

}  // namespace scenezsl::nn
