#include "lenspipe/benchgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "lenspipe/serde.hpp"
#include "lenspipe/util.hpp"

namespace lenspipe {

GeoGraph::GeoGraph(std::vector<CandidateItem> businesses) {
  for (const auto& b : businesses)
    if (!b.location)
      throw std::invalid_argument("business '" + b.item_id + "' has no location");
  businesses_ = std::move(businesses);
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kEarthRadiusM = 6371008.8;
  constexpr double kDeg2Rad = M_PI / 180.0;
  const double lat1 = a.lat * kDeg2Rad, lat2 = b.lat * kDeg2Rad;
  const double dlat = (b.lat - a.lat) * kDeg2Rad;
  const double dlon = (b.lon - a.lon) * kDeg2Rad;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(s)));
}

namespace {

std::vector<CandidateItem> knearest(const GeoGraph& graph, const GeoPoint& loc, std::size_t m,
                                    bool* flagged_short, bool parallel) {
  if (graph.size() == 0) throw std::invalid_argument("nearest over empty graph");
  if (m == 0) throw std::invalid_argument("m must be >= 1");
  const auto& all = graph.businesses();
  std::vector<double> dist(all.size());
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(all.size()); ++i)
      dist[static_cast<std::size_t>(i)] = haversine_m(loc, *all[static_cast<std::size_t>(i)].location);
  } else {
    for (std::size_t i = 0; i < all.size(); ++i) dist[i] = haversine_m(loc, *all[i].location);
  }

  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return all[a].item_id < all[b].item_id;
  });

  if (flagged_short) *flagged_short = m > all.size();
  const std::size_t take = std::min(m, all.size());
  std::vector<CandidateItem> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(all[order[i]]);
  return out;
}

std::string normalize_name(const std::string& name) {
  std::string out;
  bool in_space = true;  // swallow leading whitespace
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out += ' ';
      in_space = true;
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

std::vector<CandidateItem> nearest(const GeoGraph& graph, const GeoPoint& loc, std::size_t m,
                                   bool* flagged_short) {
  return knearest(graph, loc, m, flagged_short, true);
}

std::vector<CandidateItem> nearest_serial(const GeoGraph& graph, const GeoPoint& loc,
                                          std::size_t m, bool* flagged_short) {
  return knearest(graph, loc, m, flagged_short, false);
}

std::vector<CandidateItem> unique_name(const std::vector<CandidateItem>& items) {
  std::vector<CandidateItem> out;
  std::unordered_set<std::string> seen;
  for (const auto& item : items)
    if (seen.insert(normalize_name(item.name)).second) out.push_back(item);
  return out;
}

std::string category_of_tag(const std::string& raw_tag, const GenConfig& cfg) {
  std::string tag = normalize_name(raw_tag);
  if (tag.empty()) return {};
  if (cfg.multiword_allowlist.count(tag)) return tag;
  const auto pos = tag.find_last_of(' ');
  return pos == std::string::npos ? tag : tag.substr(pos + 1);
}

std::optional<std::string> prune_category(const std::string& raw_tag, const GenConfig& cfg,
                                          const std::map<std::string, std::size_t>& occurrences) {
  const std::string category = category_of_tag(raw_tag, cfg);
  if (category.empty()) return std::nullopt;
  if (cfg.category_blocklist.count(category)) return std::nullopt;
  if (cfg.min_category_occurrence > 0) {
    auto it = occurrences.find(category);
    if (it == occurrences.end() || it->second < cfg.min_category_occurrence) return std::nullopt;
  }
  return category;
}

std::vector<BenchmarkExample> generate_examples(const std::vector<VisitRecord>& visits,
                                                const GeoGraph& graph, const GenConfig& cfg,
                                                std::vector<std::string>* warnings) {
  if (cfg.rc_min > cfg.rc_max) throw std::invalid_argument("rc_min > rc_max");
  if (visits.empty()) return {};
  const std::string& user_id = visits.front().user_id;

  // per-category subgraphs; the candidate pool for a categorical question is
  // the businesses of that category
  std::unordered_map<std::string, std::vector<CandidateItem>> pools;
  for (const auto& b : graph.businesses()) pools[b.category].push_back(b);

  // photo taken_order is the global per-user photo index in visit order
  std::vector<std::int64_t> photo_start(visits.size() + 1, 0);
  for (std::size_t i = 0; i < visits.size(); ++i)
    photo_start[i + 1] = photo_start[i] + static_cast<std::int64_t>(visits[i].photo_refs.size());

  std::unordered_set<std::string> selected;  // business ids already used as GT
  std::mt19937_64 rng(cfg.seed ^ fnv1a64(user_id));
  std::vector<BenchmarkExample> out;

  for (std::size_t vi = 0; vi < visits.size(); ++vi) {
    const VisitRecord& b = visits[vi];
    if (b.category.empty()) continue;
    if (selected.count(b.item_id)) continue;
    if (!b.location) {
      if (warnings)
        warnings->push_back("visit '" + b.item_id + "' has no location; skipped");
      continue;
    }
    auto pool_it = pools.find(b.category);
    if (pool_it == pools.end()) continue;

    std::uniform_int_distribution<std::size_t> mdist(cfg.rc_min, cfg.rc_max);
    const std::size_t m = mdist(rng);
    GeoGraph subgraph(pool_it->second);
    std::vector<CandidateItem> candidates = unique_name(nearest(subgraph, *b.location, m));

    // GT = candidates ∩ visits not yet flagged selected (by item_id)
    std::unordered_set<std::string> cand_ids;
    for (const auto& c : candidates) cand_ids.insert(c.item_id);
    std::set<std::string> gt;
    for (const auto& v : visits)
      if (cand_ids.count(v.item_id) && !selected.count(v.item_id)) gt.insert(v.item_id);

    if (candidates.size() < cfg.fc_min || gt.size() < cfg.gtc_min) continue;

    // history: photos strictly before this visit, with enough in-category images
    const std::int64_t cutoff = photo_start[vi];
    std::int64_t in_category = 0;
    for (std::size_t j = 0; j < vi; ++j)
      if (visits[j].category == b.category)
        in_category += static_cast<std::int64_t>(visits[j].photo_refs.size());
    if (cutoff < static_cast<std::int64_t>(cfg.min_history) ||
        in_category < static_cast<std::int64_t>(cfg.min_history))
      continue;

    for (const auto& id : gt) selected.insert(id);

    BenchmarkExample ex;
    ex.query.query_id = user_id + ":q" + std::to_string(out.size());
    ex.query.user_id = user_id;
    ex.query.category = b.category;
    ex.query.question_text = "Recommend a nearby " + b.category + ".";
    ex.history_cutoff = cutoff;
    ex.history_length = cutoff;
    ex.candidates = std::move(candidates);
    ex.ground_truth_ids = std::move(gt);
    out.push_back(std::move(ex));
  }
  return out;
}

BenchStats compute_stats(const std::vector<BenchmarkExample>& examples) {
  BenchStats s;
  s.n_examples = examples.size();
  if (examples.empty()) return s;
  double imgs = 0, gts = 0, cands = 0;
  for (const auto& ex : examples) {
    imgs += static_cast<double>(ex.history_length);
    gts += static_cast<double>(ex.ground_truth_ids.size());
    cands += static_cast<double>(ex.candidates.size());
    s.per_category[ex.query.category] += 1;
  }
  const double n = static_cast<double>(examples.size());
  s.avg_images = imgs / n;
  s.avg_gt = gts / n;
  s.avg_candidates = cands / n;
  return s;
}

std::vector<VisitRecord> parse_review_log(const std::string& path) {
  std::vector<VisitRecord> out;
  for (const auto& j : read_jsonl(path)) {
    VisitRecord v;
    v.user_id = j.at("user_id").get<std::string>();
    v.item_id = j.at("item_id").get<std::string>();
    v.timestamp = j.at("timestamp").get<std::int64_t>();
    if (j.contains("categories") && !j.at("categories").empty())
      v.category = j.at("categories").front().get<std::string>();
    if (j.contains("lat") && j.contains("lon") && !j.at("lat").is_null())
      v.location = GeoPoint{j.at("lat").get<double>(), j.at("lon").get<double>()};
    if (j.contains("photo_refs")) j.at("photo_refs").get_to(v.photo_refs);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<CandidateItem> parse_business_log(const std::string& path) {
  std::vector<CandidateItem> out;
  for (const auto& j : read_jsonl(path)) {
    CandidateItem c;
    c.item_id = j.at("item_id").get<std::string>();
    c.name = j.value("name", std::string{});
    c.description = j.value("description", std::string{});
    if (j.contains("categories") && !j.at("categories").empty())
      c.category = j.at("categories").front().get<std::string>();
    if (j.contains("lat") && j.contains("lon") && !j.at("lat").is_null())
      c.location = GeoPoint{j.at("lat").get<double>(), j.at("lon").get<double>()};
    if (j.contains("rating") && !j.at("rating").is_null()) c.rating = j.at("rating").get<double>();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace lenspipe
