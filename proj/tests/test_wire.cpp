#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "lenspipe/config.hpp"
#include "lenspipe/matcher.hpp"
#include "lenspipe/util.hpp"
#include "support/mock_scorer.hpp"

using namespace lenspipe;

namespace {

MatchPrompt fixture_prompt(const std::string& query_id, std::size_t n_candidates) {
  MatchPrompt p;
  p.query_id = query_id;
  p.text = "prompt body for " + query_id;
  for (std::size_t i = 0; i < n_candidates; ++i) {
    p.candidate_tokens.push_back("<I" + std::to_string(i + 1) + ">");
    p.candidate_ids.push_back("cand" + std::to_string(i));
  }
  p.image_png = {0x89, 'P', 'N', 'G', 0x0, 0x7f};
  return p;
}

// what the conformance server computes for (seed, query_id, n)
std::vector<double> server_oracle(std::uint64_t seed, const std::string& query_id, std::size_t n) {
  std::mt19937_64 rng(seed ^ fnv1a64(query_id));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(uni(rng));
  return out;
}

}  // namespace

TEST_CASE("remote scorer round trips against the conformance server") {
  testing::MockScorerServer server(42);
  const int port = server.start();
  RemoteScorer scorer("127.0.0.1", port, 2000, 0);

  for (int q = 0; q < 100; ++q) {
    const std::string qid = "q" + std::to_string(q);
    auto prompt = fixture_prompt(qid, 1 + q % 20);
    auto got = score(prompt, scorer);
    REQUIRE(got.values == server_oracle(42, qid, prompt.candidate_ids.size()));
  }
  CHECK(server.requests_seen() == 100);

  SUBCASE("repeated calls are deterministic") {
    auto prompt = fixture_prompt("stable", 7);
    CHECK(scorer.score(prompt).values == scorer.score(prompt).values);
  }
}

TEST_CASE("request body carries the full wire schema") {
  httplib::Server capture;
  std::string seen_body;
  capture.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    const auto n = nlohmann::json::parse(req.body).at("candidate_tokens").size();
    nlohmann::json out{{"query_id", "qx"}, {"scores", std::vector<double>(n, 0.5)}};
    res.set_content(out.dump(), "application/json");
  });
  const int port = capture.bind_to_any_port("127.0.0.1");
  std::thread th([&] { capture.listen_after_bind(); });
  capture.wait_until_ready();

  auto prompt = fixture_prompt("qx", 3);
  RemoteScorer scorer("127.0.0.1", port, 2000, 0);
  auto got = scorer.score(prompt);
  capture.stop();
  th.join();

  CHECK(got.values == std::vector<double>(3, 0.5));
  const auto j = nlohmann::json::parse(seen_body);
  CHECK(j.at("query_id") == "qx");
  CHECK(j.at("prompt_text") == prompt.text);
  CHECK(j.at("candidate_tokens").get<std::vector<std::string>>() == prompt.candidate_tokens);
  CHECK(base64_decode(j.at("image_png_b64").get<std::string>()) == prompt.image_png);
}

TEST_CASE("malformed responses exhaust retries then error") {
  testing::MockScorerServer server(1);
  const int port = server.start();
  server.set_malformed(true);
  RemoteScorer scorer("127.0.0.1", port, 2000, 2);
  CHECK_THROWS_WITH(scorer.score(fixture_prompt("q", 2)), doctest::Contains("3 attempts"));
  CHECK(server.requests_seen() == 3);
}

TEST_CASE("slow responses hit the timeout and retry then error") {
  testing::MockScorerServer server(1);
  const int port = server.start();
  server.set_delay_ms(400);
  RemoteScorer scorer("127.0.0.1", port, 50, 1);
  CHECK_THROWS_WITH(scorer.score(fixture_prompt("q", 2)),
                    doctest::Contains("failed after 2 attempts"));
}

TEST_CASE("unreachable host errors after retries") {
  RemoteScorer scorer("127.0.0.1", 1, 100, 1);  // nothing listens on port 1
  CHECK_THROWS_WITH(scorer.score(fixture_prompt("q", 2)), doctest::Contains("attempts"));
}

TEST_CASE("score() rejects wrong-length vectors from any backend") {
  struct BadBackend final : ScorerBackend {
    ScoreVector score(const MatchPrompt&) override { return {{1.0}}; }
    std::string kind() const override { return "bad"; }
  } bad;
  CHECK_THROWS_WITH(score(fixture_prompt("q", 3), bad), doctest::Contains("bad"));
}

TEST_CASE("pipeline config") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("geometry constraints") {
    cfg.d = 7;
    CHECK_THROWS(cfg.validate());  // 49 != 64
    cfg.w = 49;
    cfg.h = 980;
    CHECK_NOTHROW(cfg.validate());
    cfg.h = 981;
    CHECK_THROWS(cfg.validate());
  }
  SUBCASE("profiles set preset values") {
    cfg.model_profile = "minicpm";
    cfg.dataset_profile = "yelp-v";
    cfg.apply_profiles();
    CHECK(cfg.h == 980);
    CHECK(cfg.gen.gtc_min == 5);
    CHECK(cfg.gen.min_category_occurrence == 50000);
    cfg.dataset_profile = "unknown";
    CHECK_THROWS(cfg.apply_profiles());
  }
  SUBCASE("file round trip and env override") {
    cfg.backend.kind = "remote";
    cfg.backend.port = 1234;
    cfg.gen.category_blocklist = {"store"};
    const auto path = std::filesystem::temp_directory_path() / "lenspipe_config_test.json";
    cfg.save(path.string());

    unsetenv("LENSPIPE_BACKEND_URL");
    auto back = PipelineConfig::load(path.string());
    CHECK(back.backend.kind == "remote");
    CHECK(back.backend.port == 1234);
    CHECK(back.gen.category_blocklist == std::set<std::string>{"store"});

    setenv("LENSPIPE_BACKEND_URL", "10.0.0.5:9999", 1);
    auto overridden = PipelineConfig::load(path.string());
    CHECK(overridden.backend.host == "10.0.0.5");
    CHECK(overridden.backend.port == 9999);

    setenv("LENSPIPE_BACKEND_URL", "nocolon", 1);
    CHECK_THROWS(PipelineConfig::load(path.string()));
    unsetenv("LENSPIPE_BACKEND_URL");
    std::filesystem::remove(path);
  }
}
