#include "lenspipe/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace lenspipe {

Embedding Embedding::normalized(std::span<const float> raw) {
  double sumsq = 0.0;
  for (float v : raw) sumsq += static_cast<double>(v) * v;
  if (sumsq == 0.0) throw std::invalid_argument("zero vector cannot be normalized");
  const double inv = 1.0 / std::sqrt(sumsq);
  Embedding e;
  e.values.reserve(raw.size());
  for (float v : raw) e.values.push_back(static_cast<float>(v * inv));
  return e;
}

double Embedding::dot(const Embedding& other) const {
  if (dim() != other.dim()) throw std::invalid_argument("embedding dim mismatch in dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    acc += static_cast<double>(values[i]) * other.values[i];
  return acc;
}

std::pair<std::string, bool> truncate_caption(const std::string& text) {
  std::istringstream in(text);
  std::string word, out;
  int count = 0;
  bool truncated = false;
  while (in >> word) {
    if (count == kMaxCaptionWords) {
      truncated = true;
      break;
    }
    if (count > 0) out += ' ';
    out += word;
    ++count;
  }
  return {out, truncated};
}

std::vector<std::string> canonicalize_aspects(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& raw : words) {
    std::string w;
    for (char c : raw) {
      if (c == '\n' || c == '\r') continue;
      w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    // trim
    const auto b = w.find_first_not_of(" \t");
    const auto e = w.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    w = w.substr(b, e - b + 1);
    if (w.empty()) continue;
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

std::vector<std::string> parse_aspect_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == '\n') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return canonicalize_aspects(parts);
}

std::vector<std::string> validate_example(const BenchmarkExample& ex, std::size_t fc_min,
                                          std::size_t gtc_min) {
  std::vector<std::string> violations;
  std::unordered_set<std::string> cand_ids;
  for (const auto& c : ex.candidates) {
    if (!cand_ids.insert(c.item_id).second)
      violations.push_back("candidates: duplicate item_id '" + c.item_id + "'");
    if (c.category != ex.query.category)
      violations.push_back("candidates: item '" + c.item_id + "' category '" + c.category +
                           "' != query.category '" + ex.query.category + "'");
    if (c.location) {
      if (c.location->lat < -90.0 || c.location->lat > 90.0)
        violations.push_back("candidates: item '" + c.item_id + "' latitude out of range");
      if (c.location->lon < -180.0 || c.location->lon > 180.0)
        violations.push_back("candidates: item '" + c.item_id + "' longitude out of range");
    }
  }
  for (const auto& gt : ex.ground_truth_ids) {
    if (!cand_ids.count(gt)) {
      violations.push_back("ground_truth_ids ⊄ candidates: '" + gt + "' missing");
    }
  }
  if (ex.candidates.size() < fc_min)
    violations.push_back("|candidates| < fc_min (" + std::to_string(ex.candidates.size()) + " < " +
                         std::to_string(fc_min) + ")");
  if (ex.ground_truth_ids.size() < gtc_min)
    violations.push_back("|ground_truth_ids| < gtc_min (" +
                         std::to_string(ex.ground_truth_ids.size()) + " < " +
                         std::to_string(gtc_min) + ")");
  if (ex.query.category.empty()) violations.push_back("query.category is empty");
  return violations;
}

}  // namespace lenspipe
