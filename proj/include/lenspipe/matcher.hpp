#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lenspipe/core.hpp"
#include "lenspipe/grid.hpp"
#include "lenspipe/prompt_template.hpp"

namespace lenspipe {

// Token scheme bound: candidate identifier tokens <I1>..<I100>.
constexpr std::size_t kMaxCandidates = 100;

// Gridified image plus the concatenated caption/aspect text for one
// (user, query) pair. profile_text holds blocks
// "Image k: <caption>. Aspects: <words>." in cell order; PAD cells and
// degraded-empty fields are omitted.
struct QueryProfile {
  GridImage grid;
  std::string profile_text;
  std::vector<std::string> aspect_words;  // union over non-PAD cells, cell order
};

QueryProfile make_query_profile(GridImage grid, const VisualHistory& history);

struct MatchPrompt {
  std::string query_id;
  std::string text;
  std::vector<std::string> candidate_tokens;  // "<I1>", "<I2>", ...
  std::vector<std::string> candidate_ids;
  // structured extras so non-remote backends need not parse text
  std::vector<std::string> candidate_descriptions;
  std::vector<std::string> profile_aspects;
  std::vector<std::uint8_t> image_png;  // encoded profile grid
};

struct ScoreVector {
  std::vector<double> values;  // one per candidate, higher = preferred
};

class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual ScoreVector score(const MatchPrompt& prompt) = 0;
  virtual std::string kind() const = 0;
};

// Plumbing-verification scorer: |candidate description tokens ∩ profile
// aspect words|. Deterministic for identical prompts.
class OracleScorer final : public ScorerBackend {
 public:
  ScoreVector score(const MatchPrompt& prompt) override;
  std::string kind() const override { return "oracle"; }
};

// I.i.d. uniforms from a stream derived from (seed, query_id): two runs over
// the same prompt produce identical scores.
class UniformRandomScorer final : public ScorerBackend {
 public:
  explicit UniformRandomScorer(std::uint64_t seed) : seed_(seed) {}
  ScoreVector score(const MatchPrompt& prompt) override;
  std::string kind() const override { return "uniform-random"; }

 private:
  std::uint64_t seed_;
};

// JSON-over-HTTP client for the scorer wire protocol:
//   POST /score  {query_id, prompt_text, image_png_b64, candidate_tokens:[...]}
//   -> {query_id, scores:[float,...]}
// Retries up to `retries` times on timeout/malformed response, then throws.
class RemoteScorer final : public ScorerBackend {
 public:
  RemoteScorer(std::string host, int port, int timeout_ms = 2000, int retries = 2);
  ScoreVector score(const MatchPrompt& prompt) override;
  std::string kind() const override { return "remote"; }

 private:
  std::string host_;
  int port_;
  int timeout_ms_;
  int retries_;
};

// Renders the match prompt. Candidate k is introduced by "<Ik>", in input
// order. Throws on empty candidate sets and on more than kMaxCandidates
// ("token scheme exhausted").
MatchPrompt build_match_prompt(const Query& query, const QueryProfile& profile,
                               std::span<const CandidateItem> candidates,
                               const PromptTemplate& tmpl);
MatchPrompt build_match_prompt(const Query& query, const QueryProfile& profile,
                               std::span<const CandidateItem> candidates);

// Applies the backend and validates the score vector length.
ScoreVector score(const MatchPrompt& prompt, ScorerBackend& backend);

// Descending score, ties by ascending item_id. Throws on NaN scores or
// length mismatch.
RankedResult rank(const ScoreVector& scores, std::span<const std::string> candidate_ids,
                  const std::string& query_id);

}  // namespace lenspipe
