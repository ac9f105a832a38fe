#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lenspipe/core.hpp"
#include "lenspipe/serde.hpp"

using namespace lenspipe;

namespace {

BenchmarkExample make_example(std::size_t n_candidates, std::size_t n_gt) {
  BenchmarkExample ex;
  ex.query = {"q1", "u1", "museum", "Recommend a nearby museum."};
  ex.history_cutoff = 50;
  for (std::size_t i = 0; i < n_candidates; ++i) {
    CandidateItem c;
    c.item_id = "c" + std::to_string(i);
    c.name = "Candidate " + std::to_string(i);
    c.category = "museum";
    ex.candidates.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < n_gt; ++i) ex.ground_truth_ids.insert("c" + std::to_string(i));
  return ex;
}

}  // namespace

TEST_CASE("embedding normalization") {
  const float raw[] = {3.f, 4.f};
  auto e = Embedding::normalized(raw);
  CHECK(e.values[0] == doctest::Approx(0.6));
  CHECK(e.values[1] == doctest::Approx(0.8));

  SUBCASE("idempotent") {
    auto e2 = Embedding::normalized(e.values);
    CHECK(e2.values[0] == doctest::Approx(e.values[0]).epsilon(1e-7));
    CHECK(e2.values[1] == doctest::Approx(e.values[1]).epsilon(1e-7));
  }
  SUBCASE("zero vector rejected") {
    const float zero[] = {0.f, 0.f};
    CHECK_THROWS_AS(Embedding::normalized(zero), std::invalid_argument);
  }
}

TEST_CASE("caption truncation at 30 words") {
  std::string long_caption;
  for (int i = 0; i < 35; ++i) long_caption += "w" + std::to_string(i) + " ";
  auto [text, truncated] = truncate_caption(long_caption);
  CHECK(truncated);
  int words = 1;
  for (char c : text)
    if (c == ' ') ++words;
  CHECK(words == 30);

  auto [short_text, short_trunc] = truncate_caption("a small dome");
  CHECK_FALSE(short_trunc);
  CHECK(short_text == "a small dome");
}

TEST_CASE("aspect canonicalization") {
  auto words = canonicalize_aspects({"Dome", "balcony", "Dome", "", "  sky  "});
  CHECK(words == std::vector<std::string>{"dome", "balcony", "sky"});

  auto parsed = parse_aspect_list("Dome, balcony\nDome");
  CHECK(parsed == std::vector<std::string>{"dome", "balcony"});
}

TEST_CASE("validate_example") {
  SUBCASE("well-formed: 30 candidates, 2 GTs") {
    CHECK(validate_example(make_example(30, 2), 10, 2).empty());
  }
  SUBCASE("GT not among candidates") {
    auto ex = make_example(30, 2);
    ex.ground_truth_ids.insert("ghost");
    auto v = validate_example(ex, 10, 2);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("ground_truth_ids") != std::string::npos);
  }
  SUBCASE("too few candidates") {
    auto v = validate_example(make_example(5, 2), 10, 2);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("fc_min") != std::string::npos);
  }
  SUBCASE("category mismatch") {
    auto ex = make_example(12, 2);
    ex.candidates[3].category = "restaurant";
    CHECK(validate_example(ex, 10, 2).size() == 1);
  }
  SUBCASE("bad coordinates") {
    auto ex = make_example(12, 2);
    ex.candidates[0].location = GeoPoint{95.0, 10.0};
    CHECK(validate_example(ex, 10, 2).size() == 1);
  }
}

TEST_CASE("serialize/parse round trip is identity") {
  auto ex = make_example(12, 3);
  ex.candidates[0].location = GeoPoint{48.85, 2.35};
  ex.candidates[0].rating = 4.5;
  ex.candidates[1].images.push_back({"img1", "/tmp/img1.png", 640, 480, 7});
  nlohmann::json j = ex;
  auto back = j.get<BenchmarkExample>();
  CHECK(nlohmann::json(back) == j);

  RankedResult r;
  r.query_id = "q1";
  r.scores = {{"a", 0.5}, {"b", 0.25}};
  r.ranking = {"a", "b"};
  nlohmann::json jr = r;
  CHECK(nlohmann::json(jr.get<RankedResult>()) == jr);
}
