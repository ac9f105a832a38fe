#include "lenspipe/serde.hpp"

#include <fstream>

namespace lenspipe {

using nlohmann::json;

void to_json(json& j, const GeoPoint& p) { j = json{{"lat", p.lat}, {"lon", p.lon}}; }

void from_json(const json& j, GeoPoint& p) {
  j.at("lat").get_to(p.lat);
  j.at("lon").get_to(p.lon);
}

void to_json(json& j, const ImageRecord& r) {
  j = json{{"image_id", r.image_id}, {"pixels_ref", r.pixels_ref},       {"width", r.width},
           {"height", r.height},     {"taken_order", r.taken_order}};
}

void from_json(const json& j, ImageRecord& r) {
  j.at("image_id").get_to(r.image_id);
  r.pixels_ref = j.value("pixels_ref", std::string{});
  r.width = j.value("width", 0);
  r.height = j.value("height", 0);
  r.taken_order = j.value("taken_order", std::int64_t{0});
}

void to_json(json& j, const CandidateItem& c) {
  j = json{{"item_id", c.item_id},
           {"name", c.name},
           {"description", c.description},
           {"category", c.category},
           {"images", c.images}};
  if (c.location) j["location"] = *c.location;
  if (c.rating) j["rating"] = *c.rating;
}

void from_json(const json& j, CandidateItem& c) {
  j.at("item_id").get_to(c.item_id);
  c.name = j.value("name", std::string{});
  c.description = j.value("description", std::string{});
  c.category = j.value("category", std::string{});
  if (j.contains("images")) j.at("images").get_to(c.images);
  if (j.contains("location") && !j.at("location").is_null())
    c.location = j.at("location").get<GeoPoint>();
  if (j.contains("rating") && !j.at("rating").is_null()) c.rating = j.at("rating").get<double>();
}

void to_json(json& j, const Query& q) {
  j = json{{"query_id", q.query_id},
           {"user_id", q.user_id},
           {"category", q.category},
           {"question_text", q.question_text}};
}

void from_json(const json& j, Query& q) {
  j.at("query_id").get_to(q.query_id);
  j.at("user_id").get_to(q.user_id);
  j.at("category").get_to(q.category);
  q.question_text = j.value("question_text", std::string{});
}

void to_json(json& j, const BenchmarkExample& ex) {
  j = json{{"schema", kSchemaTag},
           {"query", ex.query},
           {"history_cutoff", ex.history_cutoff},
           {"history_length", ex.history_length},
           {"candidates", ex.candidates},
           {"ground_truth_ids", ex.ground_truth_ids}};
}

void from_json(const json& j, BenchmarkExample& ex) {
  j.at("query").get_to(ex.query);
  j.at("history_cutoff").get_to(ex.history_cutoff);
  ex.history_length = j.value("history_length", std::int64_t{0});
  j.at("candidates").get_to(ex.candidates);
  j.at("ground_truth_ids").get_to(ex.ground_truth_ids);
}

void to_json(json& j, const RankedResult& r) {
  j = json{{"schema", kSchemaTag},
           {"query_id", r.query_id},
           {"scores", r.scores},
           {"ranking", r.ranking}};
}

void from_json(const json& j, RankedResult& r) {
  j.at("query_id").get_to(r.query_id);
  j.at("scores").get_to(r.scores);
  j.at("ranking").get_to(r.ranking);
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::string& path, const std::vector<json>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& r : records) out << r.dump() << '\n';
}

}  // namespace lenspipe
