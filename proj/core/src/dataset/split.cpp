#include "scenezsl/dataset/split.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace scenezsl::dataset {

std::string_view to_string(SplitErrc code) noexcept {
  switch (code) {
    case SplitErrc::kOverlappingClasses: return "OverlappingClasses";
    case SplitErrc::kUnknownClassInItem: return "UnknownClassInItem";
    case SplitErrc::kEmptySeenSet: return "EmptySeenSet";
    case SplitErrc::kMalformedLine: return "MalformedLine";
    case SplitErrc::kIo: return "Io";
  }
  return "Unknown";
}

SplitError::SplitError(SplitErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

namespace {

std::optional<std::size_t> index_of(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

enum class Section { kNone, kSeen, kUnseen, kTrain, kValid, kTest };

}  // namespace

bool SeenUnseenSplit::is_seen(std::string_view name) const {
  return index_of(seen_classes, name).has_value();
}

bool SeenUnseenSplit::is_unseen(std::string_view name) const {
  return index_of(unseen_classes, name).has_value();
}

std::optional<std::size_t> SeenUnseenSplit::seen_index(std::string_view name) const {
  return index_of(seen_classes, name);
}

std::optional<std::size_t> SeenUnseenSplit::unseen_index(std::string_view name) const {
  return index_of(unseen_classes, name);
}

SeenUnseenSplit parse_split(std::string_view text, std::filesystem::path root) {
  SeenUnseenSplit split;
  split.root = std::move(root);
  Section section = Section::kNone;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line == "[seen]") section = Section::kSeen;
      else if (line == "[unseen]") section = Section::kUnseen;
      else if (line == "[train]") section = Section::kTrain;
      else if (line == "[valid]") section = Section::kValid;
      else if (line == "[test]") section = Section::kTest;
      else {
        throw SplitError(SplitErrc::kMalformedLine,
                         "line " + std::to_string(line_no) + ": unknown section " + std::string(line));
      }
      continue;
    }

    switch (section) {
      case Section::kNone:
        throw SplitError(SplitErrc::kMalformedLine,
                         "line " + std::to_string(line_no) + ": entry outside any section");
      case Section::kSeen:
        split.seen_classes.emplace_back(line);
        break;
      case Section::kUnseen:
        split.unseen_classes.emplace_back(line);
        break;
      case Section::kTrain:
      case Section::kValid:
      case Section::kTest: {
        const auto sep = line.find_last_of(" \t");
        if (sep == std::string_view::npos) {
          throw SplitError(SplitErrc::kMalformedLine, "line " + std::to_string(line_no) +
                                                          ": expected '<path> <class>'");
        }
        SplitItem item{std::string(trim(line.substr(0, sep))), std::string(line.substr(sep + 1))};
        auto& items = section == Section::kTrain   ? split.train_items
                      : section == Section::kValid ? split.valid_items
                                                   : split.test_items;
        items.push_back(std::move(item));
        break;
      }
    }
  }

  if (split.seen_classes.empty()) {
    throw SplitError(SplitErrc::kEmptySeenSet, "manifest lists no seen classes");
  }
  std::set<std::string_view> seen(split.seen_classes.begin(), split.seen_classes.end());
  for (const auto& name : split.unseen_classes) {
    if (seen.contains(name)) {
      throw SplitError(SplitErrc::kOverlappingClasses,
                       "class '" + name + "' is listed as both seen and unseen");
    }
  }
  for (const auto* items : {&split.train_items, &split.valid_items, &split.test_items}) {
    for (const auto& item : *items) {
      if (!split.is_seen(item.class_name) && !split.is_unseen(item.class_name)) {
        throw SplitError(SplitErrc::kUnknownClassInItem,
                         "item '" + item.path + "' has unlisted class '" + item.class_name + "'");
      }
    }
  }
  return split;
}

SeenUnseenSplit load_split(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) {
    throw SplitError(SplitErrc::kIo, "cannot open '" + manifest_path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_split(buffer.str(), manifest_path.parent_path());
}

std::string format_split(const SeenUnseenSplit& split) {
  std::ostringstream out;
  out << "[seen]\n";
  for (const auto& c : split.seen_classes) out << c << '\n';
  out << "\n[unseen]\n";
  for (const auto& c : split.unseen_classes) out << c << '\n';
  const auto items = [&](const char* header, const std::vector<SplitItem>& list) {
    out << '\n' << header << '\n';
    for (const auto& item : list) out << item.path << ' ' << item.class_name << '\n';
  };
  items("[train]", split.train_items);
  items("[valid]", split.valid_items);
  items("[test]", split.test_items);
  return out.str();
}

}  // namespace scenezsl::dataset
