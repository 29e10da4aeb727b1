#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scenezsl::dataset {

struct SplitItem {
  std::string path;  ///< relative to the manifest's directory
  std::string class_name;

  friend bool operator==(const SplitItem&, const SplitItem&) = default;
};

/// Seen/unseen class partition plus the item lists of a manifest. Class
/// names are kept verbatim (e.g. "night_stand"); prompt rendering applies its
/// own display normalization.
struct SeenUnseenSplit {
  std::vector<std::string> seen_classes;
  std::vector<std::string> unseen_classes;
  std::vector<SplitItem> train_items;
  std::vector<SplitItem> valid_items;
  std::vector<SplitItem> test_items;
  std::filesystem::path root;  ///< base directory for item paths

  bool is_seen(std::string_view name) const;
  bool is_unseen(std::string_view name) const;
  /// Index into seen_classes, or nullopt.
  std::optional<std::size_t> seen_index(std::string_view name) const;
  std::optional<std::size_t> unseen_index(std::string_view name) const;

  std::filesystem::path resolve(const SplitItem& item) const { return root / item.path; }

  friend bool operator==(const SeenUnseenSplit&, const SeenUnseenSplit&) = default;
};

enum class SplitErrc {
  kOverlappingClasses,
  kUnknownClassInItem,
  kEmptySeenSet,
  kMalformedLine,
  kIo,
};

std::string_view to_string(SplitErrc code) noexcept;

class SplitError : public std::runtime_error {
 public:
  SplitError(SplitErrc code, const std::string& detail);
  SplitErrc code() const noexcept { return code_; }

 private:
  SplitErrc code_;
};

/// Parses manifest text. Sections: [seen], [unseen], [train], [valid],
/// [test]. Class sections hold one class per line; item sections hold
/// "<relative-path> <class>". '#' starts a comment.
SeenUnseenSplit parse_split(std::string_view text, std::filesystem::path root = {});

/// Reads a manifest file; item paths resolve against its parent directory.
SeenUnseenSplit load_split(const std::filesystem::path& manifest_path);

std::string format_split(const SeenUnseenSplit& split);

}  // namespace scenezsl::dataset
