#include "lenspipe/config.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace lenspipe {

using nlohmann::json;

void PipelineConfig::validate() const {
  if (static_cast<std::size_t>(d) * d != w)
    throw std::invalid_argument("d^2 must equal w (d=" + std::to_string(d) +
                                ", w=" + std::to_string(w) + ")");
  if (h <= 0 || h % d != 0) throw std::invalid_argument("h must be a positive multiple of d");
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
  if (n_centroid == 0) throw std::invalid_argument("n_centroid must be >= 1");
}

void PipelineConfig::apply_profiles() {
  if (model_profile == "paligemma") h = 896;
  else if (model_profile == "minicpm") h = 980;
  else if (!model_profile.empty() && model_profile != "custom")
    throw std::invalid_argument("unknown model profile '" + model_profile + "'");

  if (dataset_profile == "google-review-v") {
    gen.gtc_min = 2;
    gen.min_category_occurrence = 10000;
  } else if (dataset_profile == "yelp-v") {
    gen.gtc_min = 5;
    gen.min_category_occurrence = 50000;
  } else if (dataset_profile != "custom") {
    throw std::invalid_argument("unknown dataset profile '" + dataset_profile + "'");
  }
}

void to_json(json& j, const BackendConfig& c) {
  j = json{{"kind", c.kind},         {"host", c.host},
           {"port", c.port},         {"timeout_ms", c.timeout_ms},
           {"max_inflight", c.max_inflight}, {"retries", c.retries}};
}

void from_json(const json& j, BackendConfig& c) {
  c.kind = j.value("kind", c.kind);
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
  c.max_inflight = j.value("max_inflight", c.max_inflight);
  c.retries = j.value("retries", c.retries);
}

void to_json(json& j, const GenConfig& c) {
  j = json{{"rc_min", c.rc_min},
           {"rc_max", c.rc_max},
           {"fc_min", c.fc_min},
           {"gtc_min", c.gtc_min},
           {"min_history", c.min_history},
           {"min_category_occurrence", c.min_category_occurrence},
           {"seed", c.seed},
           {"category_blocklist", c.category_blocklist},
           {"multiword_allowlist", c.multiword_allowlist}};
}

void from_json(const json& j, GenConfig& c) {
  c.rc_min = j.value("rc_min", c.rc_min);
  c.rc_max = j.value("rc_max", c.rc_max);
  c.fc_min = j.value("fc_min", c.fc_min);
  c.gtc_min = j.value("gtc_min", c.gtc_min);
  c.min_history = j.value("min_history", c.min_history);
  c.min_category_occurrence = j.value("min_category_occurrence", c.min_category_occurrence);
  c.seed = j.value("seed", c.seed);
  if (j.contains("category_blocklist")) j.at("category_blocklist").get_to(c.category_blocklist);
  if (j.contains("multiword_allowlist")) j.at("multiword_allowlist").get_to(c.multiword_allowlist);
}

void to_json(json& j, const PipelineConfig& c) {
  j = json{{"schema", "lenspipe/v1"},
           {"w", c.w},
           {"d", c.d},
           {"h", c.h},
           {"n_centroid", c.n_centroid},
           {"lambda", c.lambda},
           {"max_refine_rounds", c.max_refine_rounds},
           {"seed", c.seed},
           {"dataset_profile", c.dataset_profile},
           {"model_profile", c.model_profile},
           {"backend", c.backend},
           {"gen", c.gen}};
}

void from_json(const json& j, PipelineConfig& c) {
  c.w = j.value("w", c.w);
  c.d = j.value("d", c.d);
  c.h = j.value("h", c.h);
  c.n_centroid = j.value("n_centroid", c.n_centroid);
  c.lambda = j.value("lambda", c.lambda);
  c.max_refine_rounds = j.value("max_refine_rounds", c.max_refine_rounds);
  c.seed = j.value("seed", c.seed);
  c.dataset_profile = j.value("dataset_profile", c.dataset_profile);
  c.model_profile = j.value("model_profile", c.model_profile);
  if (j.contains("backend")) j.at("backend").get_to(c.backend);
  if (j.contains("gen")) j.at("gen").get_to(c.gen);
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j = json::parse(in);
  PipelineConfig c = j.get<PipelineConfig>();
  if (const char* url = std::getenv("LENSPIPE_BACKEND_URL")) {
    // "host:port"
    const std::string s(url);
    const auto colon = s.find_last_of(':');
    if (colon == std::string::npos) throw std::runtime_error("LENSPIPE_BACKEND_URL must be host:port");
    c.backend.host = s.substr(0, colon);
    c.backend.port = std::stoi(s.substr(colon + 1));
  }
  return c;
}

void PipelineConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << json(*this).dump(2) << '\n';
}

}  // namespace lenspipe
