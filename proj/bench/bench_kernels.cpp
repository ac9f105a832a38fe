// Parallel kernels vs their serial references: top-w cosine retrieval and
// haversine k-nearest.
#include <benchmark/benchmark.h>

#include <random>

#include "lenspipe/benchgen.hpp"
#include "lenspipe/embedding_index.hpp"

using namespace lenspipe;

namespace {

struct RetrievalFixture {
  EmbeddingIndex index;
  VisualHistory history;
  CategoryCentroid centroid;

  explicit RetrievalFixture(std::size_t n_images, std::size_t dim) {
    std::mt19937_64 rng(42);
    std::normal_distribution<float> gauss(0.f, 1.f);
    std::vector<Embedding> pool;
    for (std::size_t i = 0; i < n_images; ++i) {
      std::vector<float> v(dim);
      for (auto& x : v) x = gauss(rng);
      const std::string id = "img" + std::to_string(i);
      index.ingest(id, v);
      SpectrumTriplet t;
      t.image.image_id = id;
      t.image.taken_order = static_cast<std::int64_t>(i);
      t.embedding = index.get(id);
      history.items.push_back(std::move(t));
      pool.push_back(index.get(id));
    }
    centroid = build_centroid("c", pool, n_images, 1);
  }
};

GeoGraph make_graph(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(-60, 60), lon(-180, 180);
  std::vector<CandidateItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    CandidateItem c;
    c.item_id = "b" + std::to_string(i);
    c.name = c.item_id;
    c.location = GeoPoint{lat(rng), lon(rng)};
    items.push_back(std::move(c));
  }
  return GeoGraph(std::move(items));
}

}  // namespace

static void BM_retrieve_serial(benchmark::State& state) {
  RetrievalFixture fx(static_cast<std::size_t>(state.range(0)), 768);
  for (auto _ : state) {
    auto r = retrieve_top_w_serial(fx.history, fx.index, fx.centroid, 64);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_retrieve_serial)->Arg(500)->Arg(5000)->Arg(50000);

static void BM_retrieve_omp(benchmark::State& state) {
  RetrievalFixture fx(static_cast<std::size_t>(state.range(0)), 768);
  for (auto _ : state) {
    auto r = retrieve_top_w(fx.history, fx.index, fx.centroid, 64);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_retrieve_omp)->Arg(500)->Arg(5000)->Arg(50000);

static void BM_nearest_serial(benchmark::State& state) {
  GeoGraph graph = make_graph(static_cast<std::size_t>(state.range(0)));
  const GeoPoint q{40.0, -70.0};
  for (auto _ : state) {
    auto r = nearest_serial(graph, q, 100);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_nearest_serial)->Arg(1000)->Arg(100000);

static void BM_nearest_omp(benchmark::State& state) {
  GeoGraph graph = make_graph(static_cast<std::size_t>(state.range(0)));
  const GeoPoint q{40.0, -70.0};
  for (auto _ : state) {
    auto r = nearest(graph, q, 100);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_nearest_omp)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
