#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scenezsl::scenegen {

enum class SizeTag { kNone, kSmall, kBig };

enum class Relation { kNone, kClose, kOn, kUnder, kPair, kClosePair };

struct PromptTemplate {
  int id;
  std::string_view text;
  int arity;  ///< number of distinct class placeholders
  SizeTag size_tag;
  Relation relation;

  /// Number of point-cloud operands the scene is built from.
  int operand_count() const noexcept {
    return (arity == 2 || relation == Relation::kPair || relation == Relation::kClosePair) ? 2 : 1;
  }
};

/// The ten caption templates. Index equals template id.
const std::array<PromptTemplate, 10>& prompt_templates() noexcept;

/// Template used to build evaluation label prompts ("This is a {Object}.").
inline constexpr int kLabelTemplateId = 0;

class ArityMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Lowercases and replaces underscores with spaces: "night_stand" ->
/// "night stand".
std::string display_name(std::string_view class_name);

/// Naive English plural: "es" after s/x/sh/ch, "s" otherwise.
std::string pluralize(std::string_view noun);

/// Substitutes the class names (display-normalized) into the template.
/// class_b must be present exactly when the template has arity 2.
std::string render_prompt(const PromptTemplate& tmpl, std::string_view class_a,
                          std::optional<std::string_view> class_b = std::nullopt);

/// "This is a {Object}." for the given class.
std::string label_prompt(std::string_view class_name);

/// Every caption a scene generator can emit over the given classes plus the
/// label prompts of `label_classes`, deduplicated and sorted.
std::vector<std::string> prompt_universe(const std::vector<std::string>& scene_classes,
                                         const std::vector<std::string>& label_classes);

}  // namespace scenezsl::scenegen
