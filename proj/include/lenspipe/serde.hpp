#pragma once

#include <json.hpp>

#include "lenspipe/core.hpp"

// JSON (de)serialization for the core types. All JSONL records carry a
// "schema": "lenspipe/v1" field at the record level.

namespace lenspipe {

inline constexpr const char* kSchemaTag = "lenspipe/v1";

void to_json(nlohmann::json& j, const GeoPoint& p);
void from_json(const nlohmann::json& j, GeoPoint& p);

void to_json(nlohmann::json& j, const ImageRecord& r);
void from_json(const nlohmann::json& j, ImageRecord& r);

void to_json(nlohmann::json& j, const CandidateItem& c);
void from_json(const nlohmann::json& j, CandidateItem& c);

void to_json(nlohmann::json& j, const Query& q);
void from_json(const nlohmann::json& j, Query& q);

void to_json(nlohmann::json& j, const BenchmarkExample& ex);
void from_json(const nlohmann::json& j, BenchmarkExample& ex);

void to_json(nlohmann::json& j, const RankedResult& r);
void from_json(const nlohmann::json& j, RankedResult& r);

// JSONL helpers. read_jsonl throws std::runtime_error with the 1-based line
// number on a malformed line.
std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& records);

}  // namespace lenspipe
