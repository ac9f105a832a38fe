#include "lenspipe/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "lenspipe/benchgen.hpp"
#include "lenspipe/grid.hpp"
#include "lenspipe/profile.hpp"
#include "lenspipe/refine_train.hpp"
#include "lenspipe/serde.hpp"
#include "lenspipe/util.hpp"

namespace fs = std::filesystem;

namespace lenspipe {

using nlohmann::json;

void save_centroids(const std::string& path, const std::vector<CategoryCentroid>& centroids) {
  std::vector<json> records;
  for (const auto& c : centroids)
    records.push_back(json{{"schema", kSchemaTag},
                           {"category", c.category},
                           {"values", c.centroid.values},
                           {"sample_size", c.sample_size},
                           {"sample_seed", c.sample_seed}});
  write_jsonl(path, records);
}

std::vector<CategoryCentroid> load_centroids(const std::string& path) {
  std::vector<CategoryCentroid> out;
  for (const auto& j : read_jsonl(path)) {
    CategoryCentroid c;
    c.category = j.at("category").get<std::string>();
    j.at("values").get_to(c.centroid.values);
    c.sample_size = j.at("sample_size").get<std::uint64_t>();
    c.sample_seed = j.at("sample_seed").get<std::uint64_t>();
    out.push_back(std::move(c));
  }
  return out;
}

std::unique_ptr<ScorerBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == "oracle") return std::make_unique<OracleScorer>();
  if (cfg.kind == "uniform-random") return std::make_unique<UniformRandomScorer>(0);
  if (cfg.kind == "remote")
    return std::make_unique<RemoteScorer>(cfg.host, cfg.port, cfg.timeout_ms, cfg.retries);
  throw std::invalid_argument("unknown backend kind '" + cfg.kind + "'");
}

BuildBenchResult cmd_build_bench(const std::string& review_log_path,
                                 const std::string& business_log_path,
                                 const std::string& out_benchmark_path,
                                 const std::string& out_stats_path, const PipelineConfig& cfg) {
  auto visits = parse_review_log(review_log_path);
  auto businesses = parse_business_log(business_log_path);

  // category pruning over both logs
  std::map<std::string, std::size_t> occurrences;
  for (const auto& b : businesses) {
    const std::string cat = category_of_tag(b.category, cfg.gen);
    if (!cat.empty()) occurrences[cat] += 1;
  }
  std::vector<CandidateItem> kept;
  for (auto& b : businesses) {
    auto cat = prune_category(b.category, cfg.gen, occurrences);
    if (!cat) continue;
    b.category = *cat;
    if (b.location) kept.push_back(std::move(b));
  }
  if (kept.empty()) throw std::runtime_error("0 examples: no businesses survived category pruning");
  GeoGraph graph(std::move(kept));

  std::unordered_map<std::string, std::string> item_category;
  for (const auto& b : graph.businesses()) item_category[b.item_id] = b.category;

  // group visits per user, keep chronological order, remap categories
  std::map<std::string, std::vector<VisitRecord>> per_user;
  for (auto& v : visits) {
    auto it = item_category.find(v.item_id);
    v.category = it == item_category.end() ? std::string{} : it->second;
    per_user[v.user_id].push_back(std::move(v));
  }

  std::vector<BenchmarkExample> all;
  for (auto& [user, user_visits] : per_user) {
    std::stable_sort(user_visits.begin(), user_visits.end(),
                     [](const VisitRecord& a, const VisitRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
    auto examples = generate_examples(user_visits, graph, cfg.gen);
    all.insert(all.end(), std::make_move_iterator(examples.begin()),
               std::make_move_iterator(examples.end()));
  }
  if (all.empty()) throw std::runtime_error("0 examples emitted");

  std::vector<json> records;
  records.reserve(all.size());
  for (const auto& ex : all) records.push_back(json(ex));
  write_jsonl(out_benchmark_path, records);

  BuildBenchResult res;
  res.n_examples = all.size();
  res.n_users = per_user.size();
  res.stats = compute_stats(all);
  json stats{{"schema", kSchemaTag},
             {"n_examples", res.stats.n_examples},
             {"avg_images", res.stats.avg_images},
             {"avg_gt", res.stats.avg_gt},
             {"avg_candidates", res.stats.avg_candidates},
             {"per_category", res.stats.per_category}};
  std::ofstream out(out_stats_path);
  out << stats.dump(2) << '\n';
  return res;
}

std::size_t cmd_build_centroids(const std::string& embedding_store_path,
                                const std::string& category_map_path,
                                const std::string& out_centroids_path,
                                const PipelineConfig& cfg) {
  EmbeddingIndex index = EmbeddingIndex::load(embedding_store_path);
  std::map<std::string, std::vector<Embedding>> pools;
  for (const auto& j : read_jsonl(category_map_path)) {
    const auto image_id = j.at("image_id").get<std::string>();
    const auto category = j.at("category").get<std::string>();
    if (index.contains(image_id)) pools[category].push_back(index.get(image_id));
  }
  std::vector<CategoryCentroid> centroids;
  for (const auto& [category, pool] : pools)
    centroids.push_back(build_centroid(category, pool, cfg.n_centroid, cfg.seed));
  save_centroids(out_centroids_path, centroids);
  return centroids.size();
}

namespace {

// Image loading for grids: PNG when pixels_ref resolves, otherwise a solid
// placeholder derived from the image id. Missing refs are common in synthetic
// runs; the grid content only matters to remote backends.
ImageBuffer load_or_placeholder(const ImageRecord& rec) {
  if (!rec.pixels_ref.empty() && fs::exists(rec.pixels_ref)) return read_png(rec.pixels_ref);
  const std::uint64_t h = fnv1a64(rec.image_id);
  return ImageBuffer::solid(16, 16, static_cast<std::uint8_t>(h), static_cast<std::uint8_t>(h >> 8),
                            static_cast<std::uint8_t>(h >> 16));
}

}  // namespace

RecommendResult cmd_recommend(const std::string& benchmark_path, const std::string& profiles_path,
                              const std::string& embedding_store_path,
                              const std::string& centroids_path, const std::string& cache_dir,
                              const std::string& out_results_path, const PipelineConfig& cfg,
                              ScorerBackend& backend) {
  cfg.validate();
  EmbeddingIndex index = EmbeddingIndex::load(embedding_store_path);

  std::vector<BenchmarkExample> examples;
  for (const auto& j : read_jsonl(benchmark_path)) examples.push_back(j.get<BenchmarkExample>());

  // profiles file may hold many users
  std::map<std::string, VisualHistory> histories;
  for (const auto& j : read_jsonl(profiles_path)) {
    const auto user = j.at("user_id").get<std::string>();
    SpectrumTriplet t;
    t.image.image_id = j.at("image_id").get<std::string>();
    t.image.pixels_ref = j.value("pixels_ref", std::string{});
    t.image.taken_order = j.at("taken_order").get<std::int64_t>();
    t.caption = j.value("caption", std::string{});
    if (j.contains("aspects")) j.at("aspects").get_to(t.aspect_words);
    t.degraded = j.value("degraded", false);
    t.embedding = index.get(t.image.image_id);
    auto& h = histories[user];
    h.user_id = user;
    h.items.push_back(std::move(t));
  }
  for (auto& [_, h] : histories)
    std::sort(h.items.begin(), h.items.end(), [](const auto& a, const auto& b) {
      return a.image.taken_order < b.image.taken_order;
    });

  std::map<std::string, CategoryCentroid> centroids;
  for (auto& c : load_centroids(centroids_path)) centroids[c.category] = std::move(c);

  const fs::path results_dir = fs::path(cache_dir) / "results";
  fs::create_directories(results_dir);
  const fs::path grids_dir = fs::path(cache_dir) / "grids";
  fs::create_directories(grids_dir);

  GridSpec spec;
  spec.d = cfg.d;
  spec.h = cfg.h;

  RecommendResult res;
  std::vector<std::string> failures;
  for (const auto& ex : examples) {
    const std::string key = to_hex(fnv1a64(ex.query.query_id));
    const fs::path result_path = results_dir / (key + ".json");
    if (fs::exists(result_path)) {
      ++res.n_skipped_cached;
      continue;
    }
    try {
      auto hist_it = histories.find(ex.query.user_id);
      if (hist_it == histories.end())
        throw std::runtime_error("no profile for user '" + ex.query.user_id + "'");
      VisualHistory hist;
      hist.user_id = hist_it->second.user_id;
      for (const auto& t : hist_it->second.items)
        if (t.image.taken_order < ex.history_cutoff) hist.items.push_back(t);
      if (hist.items.empty()) throw std::runtime_error("empty history before cutoff");

      auto cen_it = centroids.find(ex.query.category);
      if (cen_it == centroids.end())
        throw std::runtime_error("no centroid for category '" + ex.query.category + "'");

      RetrievalResult retrieved = retrieve_top_w(hist, index, cen_it->second, cfg.w);

      std::unordered_map<std::string, const SpectrumTriplet*> by_id;
      for (const auto& t : hist.items) by_id[t.image.image_id] = &t;
      std::vector<SourceImage> sources;
      for (const auto& id : retrieved.image_ids)
        sources.push_back({id, load_or_placeholder(by_id.at(id)->image)});

      GridImage grid = gridify(sources, spec);
      write_png((grids_dir / (key + ".png")).string(), grid.pixels);
      write_cell_map_sidecar((grids_dir / (key + ".json")).string(), ex.query.query_id, grid);

      QueryProfile qp = make_query_profile(std::move(grid), hist);
      MatchPrompt prompt = build_match_prompt(ex.query, qp, ex.candidates);
      {
        std::ofstream pf(grids_dir / (key + ".prompt.txt"));
        pf << prompt.text;
      }
      ScoreVector scores = score(prompt, backend);
      RankedResult ranked = rank(scores, prompt.candidate_ids, ex.query.query_id);

      std::ofstream rf(result_path);
      rf << json(ranked).dump() << '\n';
      ++res.n_done;
    } catch (const std::exception& e) {
      ++res.n_failed;
      failures.push_back(ex.query.query_id + ": " + e.what());
    }
  }

  // assemble final output in benchmark order from the per-query cache
  std::vector<json> records;
  for (const auto& ex : examples) {
    const fs::path result_path = results_dir / (to_hex(fnv1a64(ex.query.query_id)) + ".json");
    if (!fs::exists(result_path)) continue;
    std::ifstream rf(result_path);
    std::string line;
    std::getline(rf, line);
    records.push_back(json::parse(line));
  }
  write_jsonl(out_results_path, records);

  if (!failures.empty()) {
    std::ofstream ff(fs::path(cache_dir) / "failures.log");
    for (const auto& f : failures) ff << f << '\n';
  }
  return res;
}

EvalReport cmd_eval(const std::string& results_path, const std::string& benchmark_path,
                    const std::string& out_dir) {
  std::vector<BenchmarkExample> examples;
  for (const auto& j : read_jsonl(benchmark_path)) examples.push_back(j.get<BenchmarkExample>());
  std::vector<RankedResult> results;
  for (const auto& j : read_jsonl(results_path)) results.push_back(j.get<RankedResult>());

  // fail fast on id mismatch, listing missing/extra
  std::set<std::string> want, have;
  for (const auto& ex : examples) want.insert(ex.query.query_id);
  for (const auto& r : results) have.insert(r.query_id);
  std::vector<std::string> missing, extra;
  std::set_difference(want.begin(), want.end(), have.begin(), have.end(),
                      std::back_inserter(missing));
  std::set_difference(have.begin(), have.end(), want.begin(), want.end(),
                      std::back_inserter(extra));
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "query_id mismatch;";
    if (!missing.empty()) msg += " missing: " + std::to_string(missing.size()) + " (first '" + missing.front() + "')";
    if (!extra.empty()) msg += " extra: " + std::to_string(extra.size()) + " (first '" + extra.front() + "')";
    throw std::runtime_error(msg);
  }

  EvalReport report = evaluate(results, examples);
  write_report(report, out_dir);
  return report;
}

ExportTrainResult cmd_export_train(const std::string& corpus_dir, const std::string& benchmark_path,
                                   const std::string& profiles_path,
                                   const std::string& embedding_store_path,
                                   const std::string& out_dir, std::size_t n_grid_examples,
                                   const PipelineConfig& cfg) {
  cfg.validate();
  fs::create_directories(out_dir);

  // corpus: <id>.png with sibling <id>.txt dense caption
  std::vector<SourceImage> images;
  std::vector<std::string> captions;
  std::vector<fs::path> pngs;
  for (const auto& entry : fs::directory_iterator(corpus_dir))
    if (entry.path().extension() == ".png") pngs.push_back(entry.path());
  std::sort(pngs.begin(), pngs.end());
  for (const auto& png : pngs) {
    fs::path txt = png;
    txt.replace_extension(".txt");
    if (!fs::exists(txt)) continue;
    std::ifstream tf(txt);
    std::string caption((std::istreambuf_iterator<char>(tf)), std::istreambuf_iterator<char>());
    while (!caption.empty() && (caption.back() == '\n' || caption.back() == '\r'))
      caption.pop_back();
    images.push_back({png.stem().string(), read_png(png.string())});
    captions.push_back(std::move(caption));
  }
  if (images.size() < cfg.w)
    throw std::runtime_error("caption corpus has " + std::to_string(images.size()) +
                             " pairs, need at least " + std::to_string(cfg.w));

  GridSpec spec;
  spec.d = cfg.d;
  spec.h = cfg.h;

  ExportTrainResult res;
  std::vector<GridCaptionExample> grid_examples;
  for (std::size_t i = 0; i < n_grid_examples; ++i)
    grid_examples.push_back(build_grid_caption_example(images, captions, spec, cfg.seed + i));
  export_grid_caption_examples((fs::path(out_dir) / "grid_caption.jsonl").string(),
                               (fs::path(out_dir) / "grids").string(), grid_examples);
  res.n_grid_caption = grid_examples.size();

  // joint examples from the benchmark: label vector = GT indicator over the
  // example's candidates; aspect part reuses each profile triplet's words
  std::vector<BenchmarkExample> examples;
  for (const auto& j : read_jsonl(benchmark_path)) examples.push_back(j.get<BenchmarkExample>());
  EmbeddingIndex index = EmbeddingIndex::load(embedding_store_path);

  std::map<std::string, std::vector<nlohmann::json>> profile_rows;
  for (const auto& j : read_jsonl(profiles_path))
    profile_rows[j.at("user_id").get<std::string>()].push_back(j);

  std::vector<JointExample> joint;
  for (const auto& ex : examples) {
    auto it = profile_rows.find(ex.query.user_id);
    if (it == profile_rows.end() || it->second.empty()) continue;
    JointExample je;
    const auto& row = it->second.front();
    je.image_ref = row.at("image_id").get<std::string>();
    je.aspect_prompt = render_aspect_prompt(je.image_ref);
    if (row.contains("aspects")) row.at("aspects").get_to(je.target_words);
    je.match_prompt = ex.query.question_text;
    je.grid_ref = "";
    je.lambda = cfg.lambda;
    je.labels.reserve(ex.candidates.size());
    for (const auto& c : ex.candidates)
      je.labels.push_back(ex.ground_truth_ids.count(c.item_id) ? 1 : 0);
    if (std::find(je.labels.begin(), je.labels.end(), 1) == je.labels.end()) continue;
    joint.push_back(std::move(je));
  }
  export_joint_examples((fs::path(out_dir) / "joint.jsonl").string(), joint);
  res.n_joint = joint.size();
  return res;
}

std::vector<std::string> cmd_validate(const std::string& benchmark_path,
                                      const PipelineConfig& cfg) {
  std::vector<std::string> all;
  std::size_t lineno = 0;
  for (const auto& j : read_jsonl(benchmark_path)) {
    ++lineno;
    const auto ex = j.get<BenchmarkExample>();
    for (const auto& v : validate_example(ex, cfg.gen.fc_min, cfg.gen.gtc_min))
      all.push_back("line " + std::to_string(lineno) + " (" + ex.query.query_id + "): " + v);
  }
  return all;
}

}  // namespace lenspipe
