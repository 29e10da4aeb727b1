#include "scenezsl/semantics/coverage.hpp"

#include "scenezsl/scenegen/prompts.hpp"

namespace scenezsl::semantics {

double CoverageReport::fraction() const noexcept {
  if (total == 0) return 1.0;
  return static_cast<double>(covered()) / static_cast<double>(total);
}

CoverageReport check_coverage(const EmbeddingTable& table, std::span<const std::string> prompts) {
  CoverageReport report;
  report.total = prompts.size();
  for (const auto& prompt : prompts) {
    try {
      table.lookup(prompt);
    } catch (const TableError&) {
      report.missing.push_back(prompt);
    }
  }
  return report;
}

std::vector<std::string> split_prompt_universe(const dataset::SeenUnseenSplit& split) {
  std::vector<std::string> labels = split.seen_classes;
  labels.insert(labels.end(), split.unseen_classes.begin(), split.unseen_classes.end());
  return scenegen::prompt_universe(split.seen_classes, labels);
}

CoverageReport check_split_coverage(const EmbeddingTable& table, const dataset::SeenUnseenSplit& split) {
  const auto universe = split_prompt_universe(split);
  return check_coverage(table, universe);
}

}  // namespace scenezsl::semantics
