#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scenezsl/dataset/split.hpp"
#include "scenezsl/semantics/embedding_table.hpp"

namespace scenezsl::semantics {

struct CoverageReport {
  std::size_t total = 0;
  std::vector<std::string> missing;  ///< prompts the table cannot resolve

  std::size_t covered() const noexcept { return total - missing.size(); }
  bool complete() const noexcept { return missing.empty(); }
  /// Covered share in [0, 1]; 1 for an empty universe.
  double fraction() const noexcept;
};

/// Checks that every prompt resolves through lookup(): an exact key for a
/// contextual table, every word for a word-average table.
CoverageReport check_coverage(const EmbeddingTable& table, std::span<const std::string> prompts);

/// Every string training or evaluation on the split can request: scene
/// captions over the seen classes plus label prompts for seen and unseen.
std::vector<std::string> split_prompt_universe(const dataset::SeenUnseenSplit& split);

CoverageReport check_split_coverage(const EmbeddingTable& table, const dataset::SeenUnseenSplit& split);

}  // namespace scenezsl::semantics
