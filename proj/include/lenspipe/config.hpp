#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "lenspipe/benchgen.hpp"

namespace lenspipe {

struct BackendConfig {
  std::string kind = "oracle";  // oracle | uniform-random | remote
  std::string host = "127.0.0.1";
  int port = 8080;
  int timeout_ms = 2000;
  int max_inflight = 8;
  int retries = 2;
};

struct PipelineConfig {
  std::size_t w = 64;
  int d = 8;
  int h = 896;
  std::size_t n_centroid = 10000;
  double lambda = 2.0;
  int max_refine_rounds = 4;
  std::uint64_t seed = 0;
  std::string dataset_profile = "google-review-v";  // google-review-v | yelp-v | custom
  std::string model_profile = "paligemma";          // paligemma (h=896) | minicpm (h=980)
  BackendConfig backend;
  GenConfig gen;

  // throws unless d*d == w and geometry is valid
  void validate() const;
  // applies the dataset/model profile presets to gen/h
  void apply_profiles();

  static PipelineConfig load(const std::string& path);
  void save(const std::string& path) const;
};

void to_json(nlohmann::json& j, const BackendConfig& c);
void from_json(const nlohmann::json& j, BackendConfig& c);
void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);
void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

}  // namespace lenspipe
