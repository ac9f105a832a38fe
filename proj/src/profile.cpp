#include "lenspipe/profile.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "lenspipe/serde.hpp"

namespace lenspipe {

namespace {
const char* task_name(AugmentTask t) { return t == AugmentTask::caption ? "caption" : "aspects"; }
}

RemoteAugmenter::RemoteAugmenter(std::string host, int port, int timeout_ms)
    : host_(std::move(host)), port_(port), timeout_ms_(timeout_ms) {}

AugmenterResponse RemoteAugmenter::augment(const AugmenterRequest& req) {
  httplib::Client client(host_, port_);
  client.set_read_timeout(0, timeout_ms_ * 1000);
  nlohmann::json body{{"image_ref", req.image_id},
                      {"task", task_name(req.task)},
                      {"prompt_text", req.prompt_text}};
  auto res = client.Post("/augment", body.dump(), "application/json");
  if (!res || res->status != 200)
    throw std::runtime_error("augmenter call failed for image '" + req.image_id + "'");
  AugmenterResponse out;
  out.image_id = req.image_id;
  out.task = req.task;
  out.output_text = nlohmann::json::parse(res->body).at("output_text").get<std::string>();
  return out;
}

std::vector<float> RemoteAugmenter::embed(const std::string& image_id) {
  httplib::Client client(host_, port_);
  client.set_read_timeout(0, timeout_ms_ * 1000);
  nlohmann::json body{{"image_ref", image_id}};
  auto res = client.Post("/embed", body.dump(), "application/json");
  if (!res || res->status != 200)
    throw std::runtime_error("embed call failed for image '" + image_id + "'");
  return nlohmann::json::parse(res->body).at("embedding").get<std::vector<float>>();
}

std::string render_aspect_prompt(const std::string& image_id, const ProfileBuildOptions& opts) {
  return opts.aspect_template.render({{"ImageId", image_id}, {"Category", opts.category}});
}

std::string render_aspect_prompt(const std::string& image_id) {
  return render_aspect_prompt(image_id, ProfileBuildOptions{});
}

VisualHistory build_profile(const std::string& user_id, const std::vector<ImageRecord>& images,
                            AugmenterProvider& provider, EmbeddingIndex& index,
                            const ProfileBuildOptions& opts, std::vector<std::string>* warnings) {
  if (images.empty()) throw std::invalid_argument("build_profile: no images");

  std::vector<ImageRecord> ordered = images;
  std::sort(ordered.begin(), ordered.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.taken_order < b.taken_order; });

  std::vector<SpectrumTriplet> triplets(ordered.size());
  std::vector<std::string> local_warnings;
  std::atomic<std::size_t> failures{0};

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(ordered.size()); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const ImageRecord& img = ordered[i];
    SpectrumTriplet t;
    t.image = img;

    // embedding is mandatory; its failure fails the image outright
    std::vector<float> raw;
    try {
      raw = provider.embed(img.image_id);
    } catch (const std::exception&) {
      failures.fetch_add(1);
      t.degraded = true;
      triplets[i] = std::move(t);
      continue;
    }

    try {
      const std::string prompt =
          opts.caption_template.render({{"ImageId", img.image_id}, {"Category", opts.category}});
      auto resp = provider.augment({img.image_id, AugmentTask::caption, prompt});
      auto [caption, truncated] = truncate_caption(resp.output_text);
      t.caption = std::move(caption);
      if (truncated) {
#pragma omp critical(profile_warnings)
        local_warnings.push_back("caption for image '" + img.image_id + "' truncated to 30 words");
      }
    } catch (const std::exception&) {
      t.degraded = true;
    }
    try {
      auto resp = provider.augment(
          {img.image_id, AugmentTask::aspects, render_aspect_prompt(img.image_id, opts)});
      t.aspect_words = parse_aspect_list(resp.output_text);
    } catch (const std::exception&) {
      t.degraded = true;
    }

#pragma omp critical(profile_ingest)
    t.embedding = index.ingest(img.image_id, raw);
    triplets[i] = std::move(t);
  }

  if (failures.load() == ordered.size())
    throw std::runtime_error("build_profile: provider failed for every image");

  // drop images whose embedding failed; everything else stays, degraded or not
  VisualHistory history;
  history.user_id = user_id;
  for (auto& t : triplets)
    if (!t.embedding.values.empty()) history.items.push_back(std::move(t));
  if (warnings)
    warnings->insert(warnings->end(), local_warnings.begin(), local_warnings.end());
  return history;
}

void save_profile_jsonl(const std::string& path, const VisualHistory& history,
                        const std::string& embedding_ref) {
  std::vector<nlohmann::json> records;
  records.reserve(history.items.size());
  for (const auto& t : history.items) {
    records.push_back(nlohmann::json{{"schema", kSchemaTag},
                                     {"user_id", history.user_id},
                                     {"image_id", t.image.image_id},
                                     {"pixels_ref", t.image.pixels_ref},
                                     {"taken_order", t.image.taken_order},
                                     {"caption", t.caption},
                                     {"aspects", t.aspect_words},
                                     {"embedding_ref", embedding_ref},
                                     {"degraded", t.degraded}});
  }
  write_jsonl(path, records);
}

VisualHistory load_profile_jsonl(const std::string& path, const EmbeddingIndex& index) {
  VisualHistory history;
  for (const auto& j : read_jsonl(path)) {
    SpectrumTriplet t;
    history.user_id = j.at("user_id").get<std::string>();
    t.image.image_id = j.at("image_id").get<std::string>();
    t.image.pixels_ref = j.value("pixels_ref", std::string{});
    t.image.taken_order = j.at("taken_order").get<std::int64_t>();
    t.caption = j.value("caption", std::string{});
    if (j.contains("aspects")) j.at("aspects").get_to(t.aspect_words);
    t.degraded = j.value("degraded", false);
    t.embedding = index.get(t.image.image_id);
    history.items.push_back(std::move(t));
  }
  std::sort(history.items.begin(), history.items.end(),
            [](const SpectrumTriplet& a, const SpectrumTriplet& b) {
              return a.image.taken_order < b.image.taken_order;
            });
  return history;
}

}  // namespace lenspipe
