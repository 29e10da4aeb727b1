#include "scenezsl/scenegen/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace scenezsl::scenegen {

const std::array<PromptTemplate, 10>& prompt_templates() noexcept {
  static const std::array<PromptTemplate, 10> kTemplates = {{
      {0, "This is a {Object}.", 1, SizeTag::kNone, Relation::kNone},
      {1, "A big {Object}.", 1, SizeTag::kBig, Relation::kNone},
      {2, "A small {Object}.", 1, SizeTag::kSmall, Relation::kNone},
      {3, "Two {Objects}.", 1, SizeTag::kNone, Relation::kPair},
      {4, "Two close {Objects}.", 1, SizeTag::kNone, Relation::kClosePair},
      {5, "{ObjectA} is close to {ObjectB}.", 2, SizeTag::kNone, Relation::kClose},
      {6, "A big {ObjectA} is close to {ObjectB}.", 2, SizeTag::kBig, Relation::kClose},
      {7, "A small {ObjectA} is close to {ObjectB}.", 2, SizeTag::kSmall, Relation::kClose},
      {8, "{ObjectA} is on {ObjectB}.", 2, SizeTag::kNone, Relation::kOn},
      {9, "{ObjectA} is under {ObjectB}.", 2, SizeTag::kNone, Relation::kUnder},
  }};
  return kTemplates;
}

std::string display_name(std::string_view class_name) {
  std::string out(class_name);
  for (char& c : out) {
    c = c == '_' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string pluralize(std::string_view noun) {
  std::string out(noun);
  if (noun.ends_with('s') || noun.ends_with('x') || noun.ends_with("sh") || noun.ends_with("ch")) {
    out += "es";
  } else {
    out += 's';
  }
  return out;
}

namespace {

void replace_all(std::string& text, std::string_view key, std::string_view value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
}

}  // namespace

std::string render_prompt(const PromptTemplate& tmpl, std::string_view class_a,
                          std::optional<std::string_view> class_b) {
  if ((tmpl.arity == 2) != class_b.has_value()) {
    throw ArityMismatch("template " + std::to_string(tmpl.id) + " takes " +
                        std::to_string(tmpl.arity) + " class name(s)");
  }
  std::string text(tmpl.text);
  const std::string a = display_name(class_a);
  replace_all(text, "{Objects}", pluralize(a));
  replace_all(text, "{Object}", a);
  replace_all(text, "{ObjectA}", a);
  if (class_b) {
    replace_all(text, "{ObjectB}", display_name(*class_b));
  }
  return text;
}

std::string label_prompt(std::string_view class_name) {
  return render_prompt(prompt_templates()[kLabelTemplateId], class_name);
}

std::vector<std::string> prompt_universe(const std::vector<std::string>& scene_classes,
                                         const std::vector<std::string>& label_classes) {
  std::set<std::string> universe;
  for (const auto& tmpl : prompt_templates()) {
    for (const auto& a : scene_classes) {
      if (tmpl.arity == 1) {
        universe.insert(render_prompt(tmpl, a));
        continue;
      }
      for (const auto& b : scene_classes) {
        if (a != b) universe.insert(render_prompt(tmpl, a, b));
      }
    }
  }
  for (const auto& c : label_classes) universe.insert(label_prompt(c));
  return {universe.begin(), universe.end()};
}

}  // namespace scenezsl::scenegen
