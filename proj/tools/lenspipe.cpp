#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

#include "lenspipe/pipeline.hpp"
#include "lenspipe/profile.hpp"
#include "lenspipe/serde.hpp"

using namespace lenspipe;

namespace {

PipelineConfig load_config(const std::string& config_path) {
  PipelineConfig cfg;
  if (!config_path.empty()) cfg = PipelineConfig::load(config_path);
  cfg.apply_profiles();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lenspipe: visual-history recommendation pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Pipeline config JSON");

  // shared flag overrides
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  app.add_option("--seed", seed_override, "Seed override")->each([&](const std::string&) {
    seed_set = true;
  });

  // build-bench
  auto* bench = app.add_subcommand("build-bench", "Generate benchmark examples from review logs");
  std::string reviews, businesses, out_bench, out_stats = "stats.json";
  bench->add_option("--reviews", reviews, "Review log JSONL")->required();
  bench->add_option("--businesses", businesses, "Business JSONL")->required();
  bench->add_option("--out", out_bench, "Output benchmark JSONL")->required();
  bench->add_option("--stats", out_stats, "Output stats JSON");

  // build-profiles
  auto* profiles = app.add_subcommand("build-profiles", "Build spectrum profiles via the augmenter service");
  std::string prof_images, prof_out, prof_store, prof_user = "user";
  std::string aug_host = "127.0.0.1";
  int aug_port = 8081;
  profiles->add_option("--images", prof_images, "Image list JSONL {image_id, pixels_ref, taken_order}")->required();
  profiles->add_option("--user", prof_user, "User id");
  profiles->add_option("--out", prof_out, "Output profile JSONL")->required();
  profiles->add_option("--store", prof_store, "Output embedding store")->required();
  profiles->add_option("--augmenter-host", aug_host, "Augmenter service host");
  profiles->add_option("--augmenter-port", aug_port, "Augmenter service port");

  // build-centroids
  auto* centroids = app.add_subcommand("build-centroids", "Compute category centroids");
  std::string cen_store, cen_map, cen_out;
  centroids->add_option("--store", cen_store, "Embedding store")->required();
  centroids->add_option("--categories", cen_map, "Item-category JSONL {image_id, category}")->required();
  centroids->add_option("--out", cen_out, "Output centroid JSONL")->required();

  // recommend
  auto* recommend = app.add_subcommand("recommend", "Rank candidates for every benchmark example");
  std::string rec_bench, rec_profiles, rec_store, rec_centroids, rec_cache = "cache", rec_out;
  recommend->add_option("--benchmark", rec_bench)->required();
  recommend->add_option("--profiles", rec_profiles)->required();
  recommend->add_option("--store", rec_store)->required();
  recommend->add_option("--centroids", rec_centroids)->required();
  recommend->add_option("--cache", rec_cache, "Content-addressed artifact cache");
  recommend->add_option("--out", rec_out, "Output ranked-result JSONL")->required();
  std::string backend_kind;
  recommend->add_option("--backend", backend_kind, "oracle | uniform-random | remote");

  // eval
  auto* eval = app.add_subcommand("eval", "Compute Hit@k / MRR reports");
  std::string eval_results, eval_bench, eval_out = "report";
  eval->add_option("--results", eval_results)->required();
  eval->add_option("--benchmark", eval_bench)->required();
  eval->add_option("--out", eval_out, "Report directory");

  // export-train
  auto* train = app.add_subcommand("export-train", "Export training examples");
  std::string tr_corpus, tr_bench, tr_profiles, tr_store, tr_out = "train";
  std::size_t tr_n = 10;
  train->add_option("--corpus", tr_corpus, "DOCCI-format caption corpus directory")->required();
  train->add_option("--benchmark", tr_bench)->required();
  train->add_option("--profiles", tr_profiles)->required();
  train->add_option("--store", tr_store)->required();
  train->add_option("--out", tr_out, "Output directory");
  train->add_option("--n-grid-examples", tr_n, "Grid-caption example count");

  // validate
  auto* validate = app.add_subcommand("validate", "Check benchmark invariants");
  std::string val_bench;
  validate->add_option("--benchmark", val_bench)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig cfg = load_config(config_path);
    if (seed_set) {
      cfg.seed = seed_override;
      cfg.gen.seed = seed_override;
    }

    if (*bench) {
      auto res = cmd_build_bench(reviews, businesses, out_bench, out_stats, cfg);
      std::cout << "examples: " << res.n_examples << " users: " << res.n_users
                << " avg_candidates: " << res.stats.avg_candidates
                << " avg_gt: " << res.stats.avg_gt << "\n";
    } else if (*profiles) {
      RemoteAugmenter provider(aug_host, aug_port);
      EmbeddingIndex index;
      std::vector<ImageRecord> images;
      for (const auto& j : read_jsonl(prof_images)) images.push_back(j.get<ImageRecord>());
      std::vector<std::string> warnings;
      VisualHistory history = build_profile(prof_user, images, provider, index, {}, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      index.save(prof_store);
      save_profile_jsonl(prof_out, history, prof_store);
      std::cout << "triplets: " << history.items.size() << "\n";
    } else if (*centroids) {
      const std::size_t n = cmd_build_centroids(cen_store, cen_map, cen_out, cfg);
      std::cout << "centroids: " << n << "\n";
    } else if (*recommend) {
      if (!backend_kind.empty()) cfg.backend.kind = backend_kind;
      auto backend = make_backend(cfg.backend);
      auto res = cmd_recommend(rec_bench, rec_profiles, rec_store, rec_centroids, rec_cache,
                               rec_out, cfg, *backend);
      const std::size_t total = res.n_done + res.n_skipped_cached + res.n_failed;
      std::cout << "done: " << res.n_done << " cached: " << res.n_skipped_cached
                << " failed: " << res.n_failed << "\n";
      if (total > 0 && res.n_failed * 100 > total) return 1;  // >1% failures
    } else if (*eval) {
      EvalReport rep = cmd_eval(eval_results, eval_bench, eval_out);
      std::printf("n=%zu hit@1=%.3f hit@3=%.3f hit@10=%.3f mrr=%.3f\n", rep.n_examples, rep.hit1,
                  rep.hit3, rep.hit10, rep.mrr);
    } else if (*train) {
      auto res = cmd_export_train(tr_corpus, tr_bench, tr_profiles, tr_store, tr_out, tr_n, cfg);
      std::cout << "grid_caption: " << res.n_grid_caption << " joint: " << res.n_joint << "\n";
    } else if (*validate) {
      auto violations = cmd_validate(val_bench, cfg);
      for (const auto& v : violations) std::cerr << v << "\n";
      if (!violations.empty()) {
        std::cerr << violations.size() << " violations\n";
        return 1;
      }
      std::cout << "ok\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
