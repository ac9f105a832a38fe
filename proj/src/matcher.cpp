#include "lenspipe/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "lenspipe/util.hpp"

namespace lenspipe {

QueryProfile make_query_profile(GridImage grid, const VisualHistory& history) {
  std::unordered_map<std::string, const SpectrumTriplet*> by_id;
  for (const auto& t : history.items) by_id[t.image.image_id] = &t;

  std::string text;
  std::vector<std::string> aspects;
  std::unordered_set<std::string> seen_aspects;
  for (std::size_t i = 0; i < grid.cell_map.size(); ++i) {
    if (!grid.cell_map[i]) continue;  // PAD
    auto it = by_id.find(*grid.cell_map[i]);
    if (it == by_id.end())
      throw std::invalid_argument("grid cell image '" + *grid.cell_map[i] +
                                  "' not in history");
    const SpectrumTriplet& t = *it->second;
    for (const auto& w : t.aspect_words)
      if (seen_aspects.insert(w).second) aspects.push_back(w);
    if (t.caption.empty() && t.aspect_words.empty()) continue;  // degraded-empty
    text += "Image " + std::to_string(i + 1) + ":";
    if (!t.caption.empty()) text += " " + t.caption + ".";
    if (!t.aspect_words.empty()) {
      text += " Aspects:";
      for (std::size_t k = 0; k < t.aspect_words.size(); ++k)
        text += (k == 0 ? " " : ", ") + t.aspect_words[k];
      text += ".";
    }
    text += "\n";
  }

  QueryProfile p;
  p.grid = std::move(grid);
  p.profile_text = std::move(text);
  p.aspect_words = std::move(aspects);
  return p;
}

MatchPrompt build_match_prompt(const Query& query, const QueryProfile& profile,
                               std::span<const CandidateItem> candidates,
                               const PromptTemplate& tmpl) {
  if (candidates.empty()) throw std::invalid_argument("empty candidate set");
  if (candidates.size() > kMaxCandidates)
    throw std::invalid_argument("token scheme exhausted: " + std::to_string(candidates.size()) +
                                " candidates > " + std::to_string(kMaxCandidates));

  MatchPrompt p;
  p.query_id = query.query_id;
  std::string cand_block;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const std::string token = "<I" + std::to_string(k + 1) + ">";
    cand_block += token + " " + candidates[k].name + ": " + candidates[k].description + "\n";
    p.candidate_tokens.push_back(token);
    p.candidate_ids.push_back(candidates[k].item_id);
    p.candidate_descriptions.push_back(candidates[k].description);
  }
  p.text = tmpl.render({{"Question", query.question_text},
                        {"Category", query.category},
                        {"Profile", profile.profile_text},
                        {"Candidates", cand_block}});
  p.profile_aspects = profile.aspect_words;
  if (profile.grid.h > 0) p.image_png = encode_png(profile.grid.pixels);
  return p;
}

MatchPrompt build_match_prompt(const Query& query, const QueryProfile& profile,
                               std::span<const CandidateItem> candidates) {
  static const PromptTemplate tmpl = PromptTemplate::load(default_match_template_text());
  return build_match_prompt(query, profile, candidates, tmpl);
}

ScoreVector OracleScorer::score(const MatchPrompt& prompt) {
  std::unordered_set<std::string> aspects(prompt.profile_aspects.begin(),
                                          prompt.profile_aspects.end());
  ScoreVector out;
  out.values.reserve(prompt.candidate_ids.size());
  for (const auto& desc : prompt.candidate_descriptions) {
    std::unordered_set<std::string> counted;
    double overlap = 0.0;
    for (const auto& w : tokenize_words(desc))
      if (aspects.count(w) && counted.insert(w).second) overlap += 1.0;
    out.values.push_back(overlap);
  }
  return out;
}

ScoreVector UniformRandomScorer::score(const MatchPrompt& prompt) {
  std::mt19937_64 rng(seed_ ^ fnv1a64(prompt.query_id));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ScoreVector out;
  out.values.reserve(prompt.candidate_ids.size());
  for (std::size_t i = 0; i < prompt.candidate_ids.size(); ++i) out.values.push_back(uni(rng));
  return out;
}

RemoteScorer::RemoteScorer(std::string host, int port, int timeout_ms, int retries)
    : host_(std::move(host)), port_(port), timeout_ms_(timeout_ms), retries_(retries) {}

ScoreVector RemoteScorer::score(const MatchPrompt& prompt) {
  nlohmann::json req{{"query_id", prompt.query_id},
                     {"prompt_text", prompt.text},
                     {"image_png_b64", base64_encode(prompt.image_png)},
                     {"candidate_tokens", prompt.candidate_tokens}};
  const std::string body = req.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(0, timeout_ms_ * 1000);
    client.set_read_timeout(0, timeout_ms_ * 1000);
    auto res = client.Post("/score", body, "application/json");
    if (!res || res->status != 200) {
      last_error = res ? "http status " + std::to_string(res->status) : "transport failure/timeout";
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      ScoreVector out;
      j.at("scores").get_to(out.values);
      if (out.values.size() != prompt.candidate_ids.size())
        throw std::runtime_error("score vector length mismatch: got " +
                                 std::to_string(out.values.size()) + ", expected " +
                                 std::to_string(prompt.candidate_ids.size()));
      return out;
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
    }
  }
  throw std::runtime_error("remote scorer failed after " + std::to_string(retries_ + 1) +
                           " attempts: " + last_error);
}

ScoreVector score(const MatchPrompt& prompt, ScorerBackend& backend) {
  ScoreVector s = backend.score(prompt);
  if (s.values.size() != prompt.candidate_ids.size())
    throw std::runtime_error("backend '" + backend.kind() + "' returned " +
                             std::to_string(s.values.size()) + " scores for " +
                             std::to_string(prompt.candidate_ids.size()) + " candidates");
  return s;
}

RankedResult rank(const ScoreVector& scores, std::span<const std::string> candidate_ids,
                  const std::string& query_id) {
  if (scores.values.size() != candidate_ids.size())
    throw std::invalid_argument("scores/candidates length mismatch");
  for (double v : scores.values)
    if (std::isnan(v)) throw std::invalid_argument("NaN score");

  std::vector<std::size_t> order(candidate_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores.values[a] != scores.values[b]) return scores.values[a] > scores.values[b];
    return candidate_ids[a] < candidate_ids[b];
  });

  RankedResult r;
  r.query_id = query_id;
  for (std::size_t i = 0; i < candidate_ids.size(); ++i)
    r.scores[candidate_ids[i]] = scores.values[i];
  for (std::size_t i : order) r.ranking.push_back(candidate_ids[i]);
  return r;
}

}  // namespace lenspipe
