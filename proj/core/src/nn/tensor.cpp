#include "scenezsl/nn/tensor.hpp"

namespace scenezsl::nn {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

template <typename T>
void require(bool ok, const char* op, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (!ok) {
    throw NnError(NnErrc::kShapeMismatch,
                  std::string(op) + " of " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  }
}

}  // namespace

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  require(b.rows() == k, "matmul", a, b);
  BasicTensor<T> out(Shape{m, n});
  std::vector<double> acc(n);
  const T* bp = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const T* ai = a.data().data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = static_cast<double>(ai[p]);
      if (s == 0.0) continue;
      const T* bpp = bp + p * n;
      double* accp = acc.data();
      for (std::size_t j = 0; j < n; ++j) accp[j] += s * static_cast<double>(bpp[j]);
    }
    T* oi = out.data().data() + i * n;
    for (std::size_t j = 0; j < n; ++j) oi[j] = static_cast<T>(acc[j]);
  }
  return out;
}

template <typename T>
BasicTensor<T> matmul_tn(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  require(b.rows() == m, "matmul_tn", a, b);
  std::vector<double> acc(k * n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const T* ar = a.data().data() + r * k;
    const T* br = b.data().data() + r * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = static_cast<double>(ar[p]);
      if (s == 0.0) continue;
      double* accp = acc.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) accp[j] += s * static_cast<double>(br[j]);
    }
  }
  BasicTensor<T> out(Shape{k, n});
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<T>(acc[i]);
  return out;
}

template <typename T>
BasicTensor<T> transpose(const BasicTensor<T>& a) {
  const std::size_t m = a.rows(), n = a.cols();
  BasicTensor<T> out(Shape{n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
  }
  return out;
}

template <typename T>
BasicTensor<T> matmul_nt(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require(a.cols() == b.cols(), "matmul_nt", a, b);
  return matmul(a, transpose(b));
}

template <typename T>
BasicTensor<T> column_sums(const BasicTensor<T>& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> acc(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a.data().data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc[j] += static_cast<double>(ai[j]);
  }
  BasicTensor<T> out(Shape{n});
  for (std::size_t j = 0; j < n; ++j) out[j] = static_cast<T>(acc[j]);
  return out;
}

#define SCENEZSL_INSTANTIATE(T)                                                  \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);    \
  template BasicTensor<T> matmul_tn(const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> matmul_nt(const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> transpose(const BasicTensor<T>&);                        \
  template BasicTensor<T> column_sums(const BasicTensor<T>&);

SCENEZSL_INSTANTIATE(float)
SCENEZSL_INSTANTIATE(double)

#undef SCENEZSL_INSTANTIATE

}  // namespace scenezsl::nn
