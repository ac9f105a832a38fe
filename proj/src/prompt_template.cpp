#include "lenspipe/prompt_template.hpp"

#include <stdexcept>

namespace lenspipe {

const std::set<std::string>& PromptTemplate::default_slot_registry() {
  static const std::set<std::string> registry = {
      "Category", "Answer", "Question", "Profile", "Candidates", "ImageId",
  };
  return registry;
}

PromptTemplate PromptTemplate::load(std::string text, const std::set<std::string>& registry) {
  std::size_t pos = 0;
  while ((pos = text.find("[[", pos)) != std::string::npos) {
    const auto end = text.find("]]", pos + 2);
    if (end == std::string::npos)
      throw std::invalid_argument("unterminated slot at offset " + std::to_string(pos));
    const std::string name = text.substr(pos + 2, end - pos - 2);
    if (!registry.count(name)) throw std::invalid_argument("unknown slot [[" + name + "]]");
    pos = end + 2;
  }
  return PromptTemplate(std::move(text));
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& slots) const {
  std::string out;
  out.reserve(text_.size());
  std::size_t pos = 0;
  while (pos < text_.size()) {
    const auto open = text_.find("[[", pos);
    if (open == std::string::npos) {
      out.append(text_, pos, std::string::npos);
      break;
    }
    out.append(text_, pos, open - pos);
    const auto close = text_.find("]]", open + 2);
    const std::string name = text_.substr(open + 2, close - open - 2);
    auto it = slots.find(name);
    if (it != slots.end()) out += it->second;
    pos = close + 2;
  }
  return out;
}

const std::string& default_aspect_template_text() {
  static const std::string t =
      "List the aspect words that describe the key attributes of this image "
      "(e.g. dome, balcony). List as many relevant terms as apply, one list, "
      "comma separated. Do not explain.\n"
      "Aspect words: [[Answer]]";
  return t;
}

const std::string& default_caption_template_text() {
  static const std::string t =
      "Describe this image in one concise, grounded sentence of at most 30 "
      "words. Mention only what is visible.\n"
      "Caption: [[Answer]]";
  return t;
}

const std::string& default_match_template_text() {
  static const std::string t =
      "You are a personal recommendation assistant. The attached image is a "
      "numbered grid of photos from the user's history, most relevant first.\n"
      "Question: [[Question]]\n"
      "User profile:\n"
      "[[Profile]]\n"
      "Candidates (answer with the single best candidate token):\n"
      "[[Candidates]]\n"
      "Answer: [[Answer]]";
  return t;
}

}  // namespace lenspipe
