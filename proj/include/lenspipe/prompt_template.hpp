#pragma once

#include <map>
#include <set>
#include <string>

namespace lenspipe {

// Text template with [[Slot]] placeholders. Slot names are checked against a
// registry at load time; an unknown slot is a load error, not a render error.
class PromptTemplate {
 public:
  static const std::set<std::string>& default_slot_registry();

  static PromptTemplate load(std::string text,
                             const std::set<std::string>& registry = default_slot_registry());

  // Replaces every [[Name]] with slots.at(Name); missing slot values render
  // as the empty string.
  std::string render(const std::map<std::string, std::string>& slots) const;

  const std::string& text() const { return text_; }

 private:
  explicit PromptTemplate(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

// Default operator-replaceable templates.
const std::string& default_aspect_template_text();
const std::string& default_caption_template_text();
const std::string& default_match_template_text();

}  // namespace lenspipe
