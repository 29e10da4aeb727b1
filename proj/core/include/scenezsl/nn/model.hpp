#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "scenezsl/dataset/point_cloud.hpp"
#include "scenezsl/nn/graph.hpp"
#include "scenezsl/nn/tensor.hpp"

namespace scenezsl::nn {

/// Layer widths. The defaults are the full-size architecture: a shared
/// per-point MLP 3-64-128-1024 with max-pool, a point head 1024-512-128 and
/// a text head d-1024-512-128.
struct ModelConfig {
  std::vector<std::size_t> encoder_widths{3, 64, 128, 1024};
  std::size_t point_hidden = 512;
  std::size_t text_dim = 768;
  std::size_t text_hidden1 = 1024;
  std::size_t text_hidden2 = 512;
  std::size_t embed_dim = 128;

  std::size_t feature_dim() const { return encoder_widths.back(); }
  /// Throws NnError(kShapeMismatch) on an impossible configuration.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename T>
struct DenseLayer {
  BasicTensor<T> weight;  ///< in x out
  BasicTensor<T> bias;    ///< out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Trainable weights: encoder layers, point head (dense, ReLU, dense) and
/// text head (dense, dense, ReLU, dense).
template <typename T>
struct BasicModelParams {
  ModelConfig config;
  std::vector<DenseLayer<T>> encoder;
  std::vector<DenseLayer<T>> point_head;
  std::vector<DenseLayer<T>> text_head;

  /// Zero-valued parameters of the given shape.
  static BasicModelParams zeros(const ModelConfig& config);
  /// Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
  static BasicModelParams kaiming(const ModelConfig& config, std::uint64_t seed);

  /// Every tensor with its stable name ("encoder.0.weight", ...), in
  /// checkpoint order.
  std::vector<std::pair<std::string, BasicTensor<T>*>> named();
  std::vector<std::pair<std::string, const BasicTensor<T>*>> named() const;

  std::size_t parameter_count() const;
  bool all_finite() const;

  template <typename U>
  BasicModelParams<U> cast() const {
    BasicModelParams<U> out;
    out.config = config;
    const auto convert = [](const std::vector<DenseLayer<T>>& layers) {
      std::vector<DenseLayer<U>> result;
      for (const auto& l : layers) result.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
      return result;
    };
    out.encoder = convert(encoder);
    out.point_head = convert(point_head);
    out.text_head = convert(text_head);
    return out;
  }

  friend bool operator==(const BasicModelParams&, const BasicModelParams&) = default;
};

using ModelParams = BasicModelParams<float>;

/// Graph handles for one copy of the parameters.
struct BoundLayer {
  Var weight;
  Var bias;
};

struct BoundParams {
  std::vector<BoundLayer> encoder;
  std::vector<BoundLayer> point_head;
  std::vector<BoundLayer> text_head;
};

/// Parameter groups for bind(); unbound groups stay empty.
enum BindGroup : unsigned {
  kBindEncoder = 1u,
  kBindPointHead = 2u,
  kBindTextHead = 4u,
  kBindAll = 7u,
};

/// Adds the selected parameter groups to the graph, as leaves when
/// `trainable`.
template <typename T>
BoundParams bind(Graph<T>& graph, const BasicModelParams<T>& params, bool trainable,
                 unsigned groups = kBindAll);

/// Copies the gradients of bound leaves into `grads` (same layout), adding
/// to what is there.
template <typename T>
void accumulate_grads(const Graph<T>& graph, const BoundParams& bound, BasicModelParams<T>& grads);

/// Shared per-point MLP then max over points: n x 3 -> 1 x feature_dim.
template <typename T>
Var encode(Graph<T>& graph, const BoundParams& p, Var points);
template <typename T>
Var project_point(Graph<T>& graph, const BoundParams& p, Var h);
template <typename T>
Var project_text(Graph<T>& graph, const BoundParams& p, Var e);

/// n x 3 matrix of the cloud's coordinates.
template <typename T>
BasicTensor<T> points_tensor(const dataset::PointCloud& cloud);

// Inference entry points. Inputs with NaN/Inf raise NnError(kNonFinite);
// wrong widths raise NnError(kShapeMismatch).
template <typename T>
std::vector<T> encoder_forward(const BasicModelParams<T>& params, const dataset::PointCloud& cloud);
template <typename T>
std::vector<T> project_point(const BasicModelParams<T>& params, std::span<const T> h);
template <typename T>
std::vector<T> project_text(const BasicModelParams<T>& params, std::span<const T> e);

}  // namespace scenezsl::nn
