#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lenspipe {

// L2-normalized embedding vector. All embeddings stored in one index share
// the same dimensionality; zero vectors are rejected at construction.
struct Embedding {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }

  // Normalizes a raw vector. Throws std::invalid_argument on zero input.
  static Embedding normalized(std::span<const float> raw);

  double dot(const Embedding& other) const;
};

struct ImageRecord {
  std::string image_id;
  std::string pixels_ref;  // file path or blob key
  int width = 0;
  int height = 0;
  std::int64_t taken_order = 0;  // position in the user's chronological history
};

// Per-image unit of the user profile: (raw image, caption, aspect words, embedding).
struct SpectrumTriplet {
  ImageRecord image;
  std::string caption;                    // <= 30 whitespace-delimited words
  std::vector<std::string> aspect_words;  // lowercase, deduped, non-empty
  Embedding embedding;
  bool degraded = false;  // augmenter failed; caption/aspects may be empty
};

struct VisualHistory {
  std::string user_id;
  std::vector<SpectrumTriplet> items;  // sorted by taken_order ascending
};

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
};

struct CandidateItem {
  std::string item_id;
  std::string name;
  std::string description;
  std::string category;
  std::vector<ImageRecord> images;
  std::optional<GeoPoint> location;
  std::optional<double> rating;
};

struct Query {
  std::string query_id;
  std::string user_id;
  std::string category;  // non-empty: categorical question family
  std::string question_text;
};

struct BenchmarkExample {
  Query query;
  std::int64_t history_cutoff = 0;  // history = images with taken_order strictly before
  std::int64_t history_length = 0;  // filled by the generator; 0 if unknown
  std::vector<CandidateItem> candidates;
  std::set<std::string> ground_truth_ids;
};

struct RankedResult {
  std::string query_id;
  std::map<std::string, double> scores;
  // Descending score, ties broken by ascending item_id.
  std::vector<std::string> ranking;
};

constexpr int kMaxCaptionWords = 30;

// Truncates a caption to kMaxCaptionWords whitespace-delimited words.
// Second element is true when truncation happened.
std::pair<std::string, bool> truncate_caption(const std::string& text);

// Lowercase + order-preserving dedupe; drops empty tokens and internal newlines.
std::vector<std::string> canonicalize_aspects(const std::vector<std::string>& words);

// Splits provider output on commas and newlines, then canonicalizes.
std::vector<std::string> parse_aspect_list(const std::string& text);

// Checks every BenchmarkExample invariant; returns one description per violation.
// Never throws: validation is diagnostic, not enforcement.
std::vector<std::string> validate_example(const BenchmarkExample& ex, std::size_t fc_min,
                                          std::size_t gtc_min);

}  // namespace lenspipe
