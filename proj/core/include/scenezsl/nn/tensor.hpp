#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scenezsl::nn {

enum class NnErrc { kShapeMismatch, kNonFinite };

class NnError : public std::runtime_error {
 public:
  NnError(NnErrc code, const std::string& detail)
      : std::runtime_error((code == NnErrc::kShapeMismatch ? "ShapeMismatch: " : "NonFinite: ") +
                           detail),
        code_(code) {}
  NnErrc code() const noexcept { return code_; }

 private:
  NnErrc code_;
};

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major tensor. Reductions inside the kernels below accumulate in
/// double regardless of T.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T{0})
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}
  BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_)) {
      throw NnError(NnErrc::kShapeMismatch, "data length " + std::to_string(data_.size()) +
                                                " does not match shape " + shape_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Rows and columns of a rank-2 tensor; a rank-1 tensor is one row.
  std::size_t rows() const noexcept { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const noexcept { return shape_.empty() ? 0 : shape_.back(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }
  T& at(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }

  std::span<T> row(std::size_t r) noexcept { return std::span<T>(data_).subspan(r * cols(), cols()); }
  std::span<const T> row(std::size_t r) const noexcept {
    return std::span<const T>(data_).subspan(r * cols(), cols());
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  void fill(T value) noexcept { std::fill(data_.begin(), data_.end(), value); }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), [](T v) { return static_cast<U>(v); });
    return BasicTensor<U>(shape_, std::move(out));
  }

  static std::size_t element_count(const Shape& shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

// Kernels. All operands are rank-2 (rank-1 counts as a single row).

/// out = a * b, a: m x k, b: k x n.
template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// out = a^T * b, a: m x k, b: m x n -> k x n.
template <typename T>
BasicTensor<T> matmul_tn(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// out = a * b^T, a: m x n, b: k x n -> m x k.
template <typename T>
BasicTensor<T> matmul_nt(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> transpose(const BasicTensor<T>& a);

/// Column sums of an m x n matrix -> n.
template <typename T>
BasicTensor<T> column_sums(const BasicTensor<T>& a);

}  // namespace scenezsl::nn
