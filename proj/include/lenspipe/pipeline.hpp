#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lenspipe/config.hpp"
#include "lenspipe/embedding_index.hpp"
#include "lenspipe/evaluator.hpp"
#include "lenspipe/matcher.hpp"

namespace lenspipe {

// Centroid store: JSONL {schema, category, values[], sample_size, sample_seed}.
void save_centroids(const std::string& path, const std::vector<CategoryCentroid>& centroids);
std::vector<CategoryCentroid> load_centroids(const std::string& path);

std::unique_ptr<ScorerBackend> make_backend(const BackendConfig& cfg);

struct BuildBenchResult {
  std::size_t n_examples = 0;
  std::size_t n_users = 0;
  BenchStats stats;
};

// build-bench: review log + business log -> benchmark JSONL + stats JSON.
// Deterministic given cfg.gen.seed. Throws when zero examples are emitted.
BuildBenchResult cmd_build_bench(const std::string& review_log_path,
                                 const std::string& business_log_path,
                                 const std::string& out_benchmark_path,
                                 const std::string& out_stats_path, const PipelineConfig& cfg);

// build-centroids: embedding store + item-category JSONL {image_id, category}
// -> centroid JSONL, one centroid per category.
std::size_t cmd_build_centroids(const std::string& embedding_store_path,
                                const std::string& category_map_path,
                                const std::string& out_centroids_path,
                                const PipelineConfig& cfg);

struct RecommendResult {
  std::size_t n_done = 0;
  std::size_t n_skipped_cached = 0;
  std::size_t n_failed = 0;
};

// recommend: for each example, retrieve -> gridify -> prompt -> score -> rank.
// Grid/prompt artifacts land in cache_dir keyed by content hash; completed
// query_ids are skipped on rerun. Returns counts; callers decide the >1%
// failure exit policy.
RecommendResult cmd_recommend(const std::string& benchmark_path, const std::string& profiles_path,
                              const std::string& embedding_store_path,
                              const std::string& centroids_path, const std::string& cache_dir,
                              const std::string& out_results_path, const PipelineConfig& cfg,
                              ScorerBackend& backend);

// eval: results + benchmark -> summary JSON + breakdown CSVs under out_dir.
EvalReport cmd_eval(const std::string& results_path, const std::string& benchmark_path,
                    const std::string& out_dir);

// export-train: DOCCI-format caption corpus (directory of <id>.png/<id>.txt
// pairs) -> grid-caption JSONL; benchmark + profiles -> joint-example JSONL.
struct ExportTrainResult {
  std::size_t n_grid_caption = 0;
  std::size_t n_joint = 0;
};
ExportTrainResult cmd_export_train(const std::string& corpus_dir, const std::string& benchmark_path,
                                   const std::string& profiles_path,
                                   const std::string& embedding_store_path,
                                   const std::string& out_dir, std::size_t n_grid_examples,
                                   const PipelineConfig& cfg);

// validate: benchmark JSONL -> violations (empty = clean).
std::vector<std::string> cmd_validate(const std::string& benchmark_path, const PipelineConfig& cfg);

}  // namespace lenspipe
