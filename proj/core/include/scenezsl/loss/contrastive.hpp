#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scenezsl::loss {

class LossError : public std::runtime_error {
 public:
  enum class Code { kZeroVector, kBatchTooSmall, kBadTemperature, kShapeMismatch };
  LossError(Code code, const std::string& detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// z.v / (|z| |v|), clamped to [-1, 1]. Throws kZeroVector if either is zero.
double cosine_sim(std::span<const double> z, std::span<const double> v);

/// N x N cosine similarities between the rows of Z and V (row-major).
struct SimilarityMatrix {
  std::size_t n = 0;
  double temperature = 1.0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

SimilarityMatrix similarity_matrix(std::span<const double> z, std::span<const double> v,
                                   std::size_t n, std::size_t dim, double temperature);

enum class LossForm {
  /// Point-to-text and text-to-point cross entropy over the N x N
  /// cross-modal similarity matrix, averaged over the 2N terms.
  kCrossModal,
  /// NT-Xent over the 2N concatenated embeddings [Z; V]: every other row
  /// (same-modality rows included) is a candidate.
  kConcatenated,
};

struct ContrastiveResult {
  double loss = 0.0;
  std::vector<double> grad_z;  ///< N x dim
  std::vector<double> grad_v;  ///< N x dim
  SimilarityMatrix similarity;  ///< cross-modal cosines
};

/// Temperature-scaled contrastive loss between paired rows of Z and V (both
/// N x dim, row-major) and its exact gradient. Row maxima are subtracted
/// before exponentiation.
///
/// `groups` optionally labels rows that share a caption (equal ids); every
/// same-group candidate then counts as a positive, so the softmax target is
/// spread over the group. Empty means all rows are distinct, which is the
/// plain diagonal target.
ContrastiveResult contrastive_loss(std::span<const double> z, std::span<const double> v,
                                   std::size_t n, std::size_t dim, double temperature,
                                   LossForm form = LossForm::kCrossModal,
                                   std::span<const std::size_t> groups = {});

}  // namespace scenezsl::loss
