#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lenspipe/core.hpp"

namespace lenspipe {

// Immutable brute-force haversine index over located businesses.
class GeoGraph {
 public:
  explicit GeoGraph(std::vector<CandidateItem> businesses);

  std::size_t size() const { return businesses_.size(); }
  const std::vector<CandidateItem>& businesses() const { return businesses_; }

 private:
  std::vector<CandidateItem> businesses_;  // every entry has a location
};

// Great-circle distance in meters on WGS-84 mean radius.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

// m nearest businesses to loc, ties by ascending item_id. When m exceeds the
// graph size, returns all and sets *flagged_short. OpenMP-parallel distances.
std::vector<CandidateItem> nearest(const GeoGraph& graph, const GeoPoint& loc, std::size_t m,
                                   bool* flagged_short = nullptr);
// Serial reference for testing and benchmarking.
std::vector<CandidateItem> nearest_serial(const GeoGraph& graph, const GeoPoint& loc,
                                          std::size_t m, bool* flagged_short = nullptr);

// Keeps the first occurrence (nearest-first input order) per normalized name
// (trimmed, case-folded, internal whitespace collapsed).
std::vector<CandidateItem> unique_name(const std::vector<CandidateItem>& items);

struct GenConfig {
  std::size_t rc_min = 30;
  std::size_t rc_max = 100;
  std::size_t fc_min = 10;
  std::size_t gtc_min = 2;  // 2 for the google-review-v profile, 5 for yelp-v
  std::size_t min_history = 10;
  std::size_t min_category_occurrence = 0;  // 10k google profile, 50k yelp profile
  std::uint64_t seed = 0;
  std::set<std::string> category_blocklist;
  std::set<std::string> multiword_allowlist;
};

// One chronological review by one user.
struct VisitRecord {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
  std::string category;
  std::optional<GeoPoint> location;
  std::vector<std::string> photo_refs;
};

// Last word of the normalized tag, unless the whole tag is allowlisted
// (kept whole). Blocklist and occurrence threshold are not applied here.
std::string category_of_tag(const std::string& raw_tag, const GenConfig& cfg);

// category_of_tag, then none when the result is blocklisted or under the
// occurrence threshold.
std::optional<std::string> prune_category(const std::string& raw_tag, const GenConfig& cfg,
                                          const std::map<std::string, std::size_t>& occurrences);

// Candidate/ground-truth generation over one user's chronological visits.
// For each unselected in-category visit: draw m ~ Uniform[rc_min, rc_max],
// candidates = unique_name(nearest(graph, visit.loc, m)), GT = candidates ∩
// not-yet-selected visits (by item_id); discard when |candidates| < fc_min,
// |GT| < gtc_min, or the pre-visit photo history has fewer than min_history
// in-category images; otherwise flag the GT members selected and emit.
// Deterministic given (visits, graph, cfg.seed).
std::vector<BenchmarkExample> generate_examples(const std::vector<VisitRecord>& visits,
                                                const GeoGraph& graph, const GenConfig& cfg,
                                                std::vector<std::string>* warnings = nullptr);

struct BenchStats {
  std::size_t n_examples = 0;
  double avg_images = 0.0;
  double avg_gt = 0.0;
  double avg_candidates = 0.0;
  std::map<std::string, std::size_t> per_category;
};

BenchStats compute_stats(const std::vector<BenchmarkExample>& examples);

// Review-log / business JSONL parsing per the external interface schema.
std::vector<VisitRecord> parse_review_log(const std::string& path);
std::vector<CandidateItem> parse_business_log(const std::string& path);

}  // namespace lenspipe
