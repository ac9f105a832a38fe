#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "lenspipe/embedding_index.hpp"

using namespace lenspipe;

namespace {

VisualHistory make_history(EmbeddingIndex& index, std::size_t n, std::size_t dim,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> gauss(0.f, 1.f);
  VisualHistory h;
  h.user_id = "u";
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> v(dim);
    for (auto& x : v) x = gauss(rng);
    const std::string id = "img" + std::to_string(i);
    index.ingest(id, v);
    SpectrumTriplet t;
    t.image.image_id = id;
    t.image.taken_order = static_cast<std::int64_t>(i);
    t.embedding = index.get(id);
    h.items.push_back(std::move(t));
  }
  return h;
}

}  // namespace

TEST_CASE("ingest normalizes and fixes dim") {
  EmbeddingIndex index;
  const float v[] = {3.f, 4.f};
  const auto& e = index.ingest("a", v);
  CHECK(e.values[0] == doctest::Approx(0.6f));
  CHECK(e.values[1] == doctest::Approx(0.8f));
  CHECK(index.dim() == 2);

  SUBCASE("re-ingest identical pair is a no-op") {
    CHECK_NOTHROW(index.ingest("a", v));
    CHECK(index.size() == 1);
  }
  SUBCASE("different vector under same id rejected") {
    const float w[] = {1.f, 0.f};
    CHECK_THROWS(index.ingest("a", w));
  }
  SUBCASE("dim mismatch names dims") {
    const float w[] = {1.f, 0.f, 0.f};
    CHECK_THROWS_WITH_AS(index.ingest("b", w), doctest::Contains("dim mismatch"),
                         std::invalid_argument);
  }
  SUBCASE("zero vector rejected") {
    const float z[] = {0.f, 0.f};
    CHECK_THROWS_WITH_AS(index.ingest("z", z), doctest::Contains("zero vector"),
                         std::invalid_argument);
  }
}

TEST_CASE("build_centroid") {
  SUBCASE("mean of one") {
    std::vector<Embedding> pool = {Embedding{{0.6f, 0.8f}}};
    auto c = build_centroid("cat", pool, 1, 0);
    CHECK(c.centroid.values[0] == doctest::Approx(0.6f));
    CHECK(c.centroid.values[1] == doctest::Approx(0.8f));
    CHECK(c.sample_size == 1);
  }
  SUBCASE("normalized mean of two unit axes") {
    std::vector<Embedding> pool = {Embedding{{1.f, 0.f}}, Embedding{{0.f, 1.f}}};
    auto c = build_centroid("cat", pool, 2, 0);
    CHECK(c.centroid.values[0] == doctest::Approx(0.70710678).epsilon(1e-6));
    CHECK(c.centroid.values[1] == doctest::Approx(0.70710678).epsilon(1e-6));
  }
  SUBCASE("deterministic given seed") {
    std::mt19937_64 rng(3);
    std::normal_distribution<float> gauss(0.f, 1.f);
    std::vector<Embedding> pool;
    for (int i = 0; i < 100; ++i) {
      std::vector<float> v(8);
      for (auto& x : v) x = gauss(rng);
      pool.push_back(Embedding::normalized(v));
    }
    auto a = build_centroid("cat", pool, 10, 99);
    auto b = build_centroid("cat", pool, 10, 99);
    CHECK(a.centroid.values == b.centroid.values);
    auto c = build_centroid("cat", pool, 10, 100);
    CHECK(a.centroid.values != c.centroid.values);
  }
  SUBCASE("empty pool errors") {
    std::vector<Embedding> pool;
    CHECK_THROWS(build_centroid("cat", pool, 1, 0));
  }
}

TEST_CASE("retrieve_top_w ordering and bounds") {
  EmbeddingIndex index;
  // similarities against centroid [1,0]: img0=0.9-ish, img1=0.1-ish, img2=0.5-ish
  index.ingest("img0", std::vector<float>{0.9f, std::sqrt(1.f - 0.81f)});
  index.ingest("img1", std::vector<float>{0.1f, std::sqrt(1.f - 0.01f)});
  index.ingest("img2", std::vector<float>{0.5f, std::sqrt(1.f - 0.25f)});
  VisualHistory h;
  h.user_id = "u";
  for (int i = 0; i < 3; ++i) {
    SpectrumTriplet t;
    t.image.image_id = "img" + std::to_string(i);
    t.image.taken_order = i;
    h.items.push_back(std::move(t));
  }
  CategoryCentroid c;
  c.centroid = Embedding{{1.f, 0.f}};

  auto r = retrieve_top_w(h, index, c, 2);
  CHECK(r.image_ids == std::vector<std::string>{"img0", "img2"});
  CHECK(r.similarities[0] > r.similarities[1]);

  SUBCASE("w larger than history returns all") {
    auto all = retrieve_top_w(h, index, c, 64);
    CHECK(all.image_ids.size() == 3);
  }
  SUBCASE("missing embedding names the image") {
    h.items[0].image.image_id = "phantom";
    CHECK_THROWS_WITH_AS(retrieve_top_w(h, index, c, 2), doctest::Contains("phantom"),
                         std::out_of_range);
  }
}

TEST_CASE("parallel retrieval equals serial reference") {
  EmbeddingIndex index;
  auto h = make_history(index, 500, 32, 11);
  std::vector<Embedding> pool;
  for (const auto& t : h.items) pool.push_back(index.get(t.image.image_id));
  auto c = build_centroid("cat", pool, 100, 5);

  auto par = retrieve_top_w(h, index, c, 64);
  auto ser = retrieve_top_w_serial(h, index, c, 64);
  CHECK(par.image_ids == ser.image_ids);
  CHECK(par.similarities == ser.similarities);
}

TEST_CASE("retrieval invariant to history list order") {
  EmbeddingIndex index;
  auto h = make_history(index, 50, 16, 21);
  auto base = retrieve_top_w(h, index, CategoryCentroid{"", index.get("img0"), 1, 0}, 10);

  VisualHistory shuffled = h;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
  auto again = retrieve_top_w(shuffled, index, CategoryCentroid{"", index.get("img0"), 1, 0}, 10);
  CHECK(base.image_ids == again.image_ids);
}

TEST_CASE("binary store round trip is bit-exact") {
  EmbeddingIndex index;
  make_history(index, 20, 7, 33);
  const auto path = std::filesystem::temp_directory_path() / "lenspipe_store_test.bin";
  index.save(path.string());
  auto loaded = EmbeddingIndex::load(path.string());
  CHECK(loaded.dim() == index.dim());
  CHECK(loaded.size() == index.size());
  for (const auto& id : index.ids()) CHECK(loaded.get(id).values == index.get(id).values);

  // saving the loaded index reproduces the file byte for byte
  const auto path2 = std::filesystem::temp_directory_path() / "lenspipe_store_test2.bin";
  loaded.save(path2.string());
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::string da((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string db((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(da == db);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);

  SUBCASE("bad magic rejected") {
    const auto bad = std::filesystem::temp_directory_path() / "lenspipe_bad_store.bin";
    std::ofstream out(bad, std::ios::binary);
    out << "NOTMAGIC" << std::string(16, '\0');
    out.close();
    CHECK_THROWS_WITH_AS(EmbeddingIndex::load(bad.string()), doctest::Contains("magic"),
                         std::runtime_error);
    std::filesystem::remove(bad);
  }
}
