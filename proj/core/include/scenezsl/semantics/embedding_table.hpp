#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scenezsl::semantics {

enum class TableKind { kContextual, kWordAverage };

std::string_view to_string(TableKind kind) noexcept;

enum class TableErrc {
  kDimMismatch,
  kDuplicateKey,
  kMalformedLine,
  kMissingPrompt,
  kMissingWord,
  kIo,
};

std::string_view to_string(TableErrc code) noexcept;

class TableError : public std::runtime_error {
 public:
  TableError(TableErrc code, const std::string& detail, std::size_t line = 0);
  TableErrc code() const noexcept { return code_; }
  /// 1-based JSONL line for load errors, 0 otherwise.
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  TableErrc code_;
  std::size_t line_;
  std::string detail_;
};

/// Frozen text-side embeddings keyed by exact UTF-8 text. Immutable once
/// built; lookups are safe from any thread.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, TableKind kind);

  std::size_t dim() const noexcept { return dim_; }
  TableKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, std::vector<double>, std::less<>>& entries() const noexcept {
    return entries_;
  }

  /// Adds a row; throws DimMismatch, DuplicateKey, or MalformedLine for
  /// non-finite values.
  void insert(std::string text, std::vector<double> vector);

  bool contains(std::string_view text) const;

  /// Exact match first. For word-average tables a miss falls back to the mean
  /// of the per-word vectors (see tokenize()).
  std::vector<double> lookup(std::string_view text) const;

  /// Lowercase, strip '.' and ',', split on whitespace.
  static std::vector<std::string> tokenize(std::string_view text);

 private:
  std::size_t dim_;
  TableKind kind_;
  std::map<std::string, std::vector<double>, std::less<>> entries_;
};

/// Parses JSONL rows {"text": str, "dim": int, "vector": [dim numbers]}. An
/// optional per-row "kind" of "word_average" marks the table as a word
/// table; otherwise it is contextual. Empty documents are rejected.
EmbeddingTable parse_table(std::string_view jsonl);
EmbeddingTable load_table(const std::filesystem::path& path);

/// Writes rows sorted by text, one JSON object per line.
std::string format_table(const EmbeddingTable& table);

}  // namespace scenezsl::semantics
