#include "scenezsl/nn/model.hpp"

#include <cmath>

#include "scenezsl/rng.hpp"

namespace scenezsl::nn {

void ModelConfig::validate() const {
  if (encoder_widths.size() < 2 || encoder_widths.front() != 3) {
    throw NnError(NnErrc::kShapeMismatch, "encoder widths must start at 3 and have >= 1 layer");
  }
  for (std::size_t w : encoder_widths) {
    if (w == 0) throw NnError(NnErrc::kShapeMismatch, "zero-width encoder layer");
  }
  if (point_hidden == 0 || text_dim == 0 || text_hidden1 == 0 || text_hidden2 == 0 || embed_dim == 0) {
    throw NnError(NnErrc::kShapeMismatch, "zero-width head layer");
  }
}

namespace {

// (in, out) for every layer of a group.
std::vector<std::pair<std::size_t, std::size_t>> encoder_dims(const ModelConfig& c) {
  std::vector<std::pair<std::size_t, std::size_t>> dims;
  for (std::size_t i = 0; i + 1 < c.encoder_widths.size(); ++i) {
    dims.emplace_back(c.encoder_widths[i], c.encoder_widths[i + 1]);
  }
  return dims;
}

std::vector<std::pair<std::size_t, std::size_t>> point_head_dims(const ModelConfig& c) {
  return {{c.feature_dim(), c.point_hidden}, {c.point_hidden, c.embed_dim}};
}

std::vector<std::pair<std::size_t, std::size_t>> text_head_dims(const ModelConfig& c) {
  return {{c.text_dim, c.text_hidden1}, {c.text_hidden1, c.text_hidden2}, {c.text_hidden2, c.embed_dim}};
}

template <typename T>
std::vector<DenseLayer<T>> zero_layers(const std::vector<std::pair<std::size_t, std::size_t>>& dims) {
  std::vector<DenseLayer<T>> layers;
  for (auto [in, out] : dims) {
    layers.push_back({BasicTensor<T>(Shape{in, out}), BasicTensor<T>(Shape{out})});
  }
  return layers;
}

template <typename T>
void check_finite(std::span<const T> values, const char* what) {
  for (T v : values) {
    if (!std::isfinite(v)) throw NnError(NnErrc::kNonFinite, std::string(what) + " contains NaN or Inf");
  }
}

}  // namespace

template <typename T>
BasicModelParams<T> BasicModelParams<T>::zeros(const ModelConfig& config) {
  config.validate();
  BasicModelParams p;
  p.config = config;
  p.encoder = zero_layers<T>(encoder_dims(config));
  p.point_head = zero_layers<T>(point_head_dims(config));
  p.text_head = zero_layers<T>(text_head_dims(config));
  return p;
}

template <typename T>
BasicModelParams<T> BasicModelParams<T>::kaiming(const ModelConfig& config, std::uint64_t seed) {
  BasicModelParams p = zeros(config);
  std::uint64_t index = 0;
  for (auto& [name, tensor] : p.named()) {
    const std::uint64_t stream = index++;
    if (tensor->rank() != 2) continue;
    const double bound = std::sqrt(6.0 / static_cast<double>(tensor->dim(0)));
    Philox rng(derive_seed(seed, {stream}));
    for (T& w : tensor->data()) w = static_cast<T>(rng.uniform(-bound, bound));
  }
  return p;
}

template <typename T>
std::vector<std::pair<std::string, BasicTensor<T>*>> BasicModelParams<T>::named() {
  std::vector<std::pair<std::string, BasicTensor<T>*>> out;
  const auto add = [&out](const std::string& group, std::vector<DenseLayer<T>>& layers) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      out.emplace_back(group + "." + std::to_string(i) + ".weight", &layers[i].weight);
      out.emplace_back(group + "." + std::to_string(i) + ".bias", &layers[i].bias);
    }
  };
  add("encoder", encoder);
  add("point_head", point_head);
  add("text_head", text_head);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const BasicTensor<T>*>> BasicModelParams<T>::named() const {
  auto mutable_view = const_cast<BasicModelParams*>(this)->named();
  std::vector<std::pair<std::string, const BasicTensor<T>*>> out;
  for (auto& [name, tensor] : mutable_view) out.emplace_back(std::move(name), tensor);
  return out;
}

template <typename T>
std::size_t BasicModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, tensor] : named()) n += tensor->size();
  return n;
}

template <typename T>
bool BasicModelParams<T>::all_finite() const {
  for (const auto& [name, tensor] : named()) {
    if (!tensor->all_finite()) return false;
  }
  return true;
}

template <typename T>
BoundParams bind(Graph<T>& graph, const BasicModelParams<T>& params, bool trainable, unsigned groups) {
  const auto bind_group = [&](const std::vector<DenseLayer<T>>& layers, unsigned flag) {
    std::vector<BoundLayer> out;
    if ((groups & flag) == 0) return out;
    for (const auto& layer : layers) {
      if (trainable) {
        out.push_back({graph.leaf(layer.weight), graph.leaf(layer.bias)});
      } else {
        out.push_back({graph.constant(layer.weight), graph.constant(layer.bias)});
      }
    }
    return out;
  };
  return {bind_group(params.encoder, kBindEncoder), bind_group(params.point_head, kBindPointHead),
          bind_group(params.text_head, kBindTextHead)};
}

template <typename T>
void accumulate_grads(const Graph<T>& graph, const BoundParams& bound, BasicModelParams<T>& grads) {
  const auto add_group = [&](const std::vector<BoundLayer>& vars, std::vector<DenseLayer<T>>& layers) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      for (auto [var, tensor] : {std::pair{vars[i].weight, &layers[i].weight},
                                 std::pair{vars[i].bias, &layers[i].bias}}) {
        if (!graph.requires_grad(var)) continue;
        const BasicTensor<T> g = graph.grad(var);
        auto dst = tensor->data();
        auto src = g.data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
    }
  };
  add_group(bound.encoder, grads.encoder);
  add_group(bound.point_head, grads.point_head);
  add_group(bound.text_head, grads.text_head);
}

template <typename T>
Var encode(Graph<T>& graph, const BoundParams& p, Var points) {
  Var x = points;
  for (const auto& layer : p.encoder) {
    x = graph.relu(graph.dense(x, layer.weight, layer.bias));
  }
  return graph.max_over_rows(x);
}

template <typename T>
Var project_point(Graph<T>& graph, const BoundParams& p, Var h) {
  Var x = graph.relu(graph.dense(h, p.point_head[0].weight, p.point_head[0].bias));
  return graph.dense(x, p.point_head[1].weight, p.point_head[1].bias);
}

template <typename T>
Var project_text(Graph<T>& graph, const BoundParams& p, Var e) {
  Var x = graph.dense(e, p.text_head[0].weight, p.text_head[0].bias);
  x = graph.relu(graph.dense(x, p.text_head[1].weight, p.text_head[1].bias));
  return graph.dense(x, p.text_head[2].weight, p.text_head[2].bias);
}

template <typename T>
BasicTensor<T> points_tensor(const dataset::PointCloud& cloud) {
  BasicTensor<T> x(Shape{cloud.size(), 3});
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) x.at(i, c) = static_cast<T>(cloud.points[i][c]);
  }
  return x;
}

template <typename T>
std::vector<T> encoder_forward(const BasicModelParams<T>& params, const dataset::PointCloud& cloud) {
  if (cloud.empty()) throw NnError(NnErrc::kShapeMismatch, "encoder input has no points");
  BasicTensor<T> x = points_tensor<T>(cloud);
  check_finite<T>(x.data(), "point cloud");
  Graph<T> graph;
  const BoundParams bound = bind(graph, params, false, kBindEncoder);
  const Var h = encode(graph, bound, graph.constant(std::move(x)));
  const auto out = graph.value(h).data();
  return {out.begin(), out.end()};
}

template <typename T>
std::vector<T> project_point(const BasicModelParams<T>& params, std::span<const T> h) {
  if (h.size() != params.config.feature_dim()) {
    throw NnError(NnErrc::kShapeMismatch, "point head expects " + std::to_string(params.config.feature_dim()) +
                                              " features, got " + std::to_string(h.size()));
  }
  check_finite(h, "point feature");
  Graph<T> graph;
  const BoundParams bound = bind(graph, params, false, kBindPointHead);
  const Var z = project_point(graph, bound,
                              graph.constant(BasicTensor<T>(Shape{1, h.size()}, {h.begin(), h.end()})));
  const auto out = graph.value(z).data();
  return {out.begin(), out.end()};
}

template <typename T>
std::vector<T> project_text(const BasicModelParams<T>& params, std::span<const T> e) {
  if (e.size() != params.config.text_dim) {
    throw NnError(NnErrc::kShapeMismatch, "text head expects " + std::to_string(params.config.text_dim) +
                                              " features, got " + std::to_string(e.size()));
  }
  check_finite(e, "text embedding");
  Graph<T> graph;
  const BoundParams bound = bind(graph, params, false, kBindTextHead);
  const Var v = project_text(graph, bound,
                             graph.constant(BasicTensor<T>(Shape{1, e.size()}, {e.begin(), e.end()})));
  const auto out = graph.value(v).data();
  return {out.begin(), out.end()};
}

#define SCENEZSL_INSTANTIATE(T)                                                                   \
  template struct BasicModelParams<T>;                                                             \
  template BoundParams bind(Graph<T>&, const BasicModelParams<T>&, bool, unsigned);                \
  template void accumulate_grads(const Graph<T>&, const BoundParams&, BasicModelParams<T>&);       \
  template Var encode(Graph<T>&, const BoundParams&, Var);                                         \
  template Var project_point(Graph<T>&, const BoundParams&, Var);                                  \
  template Var project_text(Graph<T>&, const BoundParams&, Var);                                   \
  template BasicTensor<T> points_tensor<T>(const dataset::PointCloud&);                            \
  template std::vector<T> encoder_forward(const BasicModelParams<T>&, const dataset::PointCloud&); \
  template std::vector<T> project_point(const BasicModelParams<T>&, std::span<const T>);           \
  template std::vector<T> project_text(const BasicModelParams<T>&, std::span<const T>);

SCENEZSL_INSTANTIATE(float)
SCENEZSL_INSTANTIATE(double)

#undef SCENEZSL_INSTANTIATE

}  // namespace scenezsl::nn
