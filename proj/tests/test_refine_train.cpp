#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <unordered_set>

#include "lenspipe/refine_train.hpp"

using namespace lenspipe;

namespace {

bool is_subset(const std::vector<std::string>& sub, const std::vector<std::string>& super) {
  std::unordered_set<std::string> s(super.begin(), super.end());
  for (const auto& w : sub)
    if (!s.count(w)) return false;
  return true;
}

}  // namespace

TEST_CASE("identity selector converges after round 1") {
  auto state = RefinementState::initial("img", {"dome", "blue", "sky"});
  auto identity = [](const std::vector<std::string>& cur, const std::vector<std::string>&) {
    return cur;
  };
  state = refine_round(std::move(state), identity, {});
  CHECK(state.round == 1);
  CHECK(state.converged);
  CHECK(state.word_sets[1] == state.word_sets[0]);
}

TEST_CASE("gt containment selector keeps words in ground truth text") {
  auto state = RefinementState::initial("img", {"dome", "blue", "sky"});
  state = refine_round(std::move(state), gt_containment_selector(),
                       {"The Dome cathedral is a landmark"});
  CHECK(state.current() == std::vector<std::string>{"dome"});
}

TEST_CASE("out-of-set words are dropped with a warning") {
  auto state = RefinementState::initial("img", {"dome", "sky"});
  auto rogue = [](const std::vector<std::string>&, const std::vector<std::string>&) {
    return std::vector<std::string>{"dome", "spire"};
  };
  std::vector<std::string> warnings;
  state = refine_round(std::move(state), rogue, {}, kDefaultMaxRefineRounds, &warnings);
  CHECK(state.current() == std::vector<std::string>{"dome"});
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("spire") != std::string::npos);
}

TEST_CASE("empty selection keeps previous set and converges") {
  auto state = RefinementState::initial("img", {"dome"});
  auto nothing = [](const std::vector<std::string>&, const std::vector<std::string>&) {
    return std::vector<std::string>{};
  };
  state = refine_round(std::move(state), nothing, {});
  CHECK(state.converged);
  CHECK(state.current() == std::vector<std::string>{"dome"});
}

TEST_CASE("refinement terminates within 4 rounds under adversarial selectors") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> w0;
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) w0.push_back("w" + std::to_string(i));
    auto adversary = [&rng](const std::vector<std::string>& cur,
                            const std::vector<std::string>&) {
      std::vector<std::string> out;
      for (const auto& w : cur)
        if (rng() % 2) out.push_back(w);
      if (rng() % 4 == 0) out.push_back("alien");
      return out;
    };
    auto state = run_refinement(RefinementState::initial("img", w0), adversary, {});
    REQUIRE(state.converged);
    REQUIRE(state.round <= kDefaultMaxRefineRounds);
    for (std::size_t j = 1; j < state.word_sets.size(); ++j)
      REQUIRE(is_subset(state.word_sets[j], state.word_sets[j - 1]));
  }
}

TEST_CASE("grid caption example target format") {
  GridSpec spec{2, 32, {}};  // w = 4
  std::vector<SourceImage> images;
  std::vector<std::string> captions;
  for (int i = 0; i < 6; ++i) {
    images.push_back({"im" + std::to_string(i), ImageBuffer::solid(8, 8, 10, 20, 30)});
    captions.push_back("cap" + std::to_string(i));
  }
  auto ex = build_grid_caption_example(images, captions, spec, 42);
  // segment k is "Image k: <caption of sampled image k>"
  std::string expected;
  for (std::size_t k = 0; k < ex.sampled_ids.size(); ++k) {
    if (k) expected += ", ";
    const std::string idx = ex.sampled_ids[k].substr(2);
    expected += "Image " + std::to_string(k + 1) + ": cap" + idx;
  }
  CHECK(ex.target_text == expected);
  CHECK(ex.sampled_ids.size() == 4);

  SUBCASE("deterministic under seed") {
    auto ex2 = build_grid_caption_example(images, captions, spec, 42);
    CHECK(ex2.target_text == ex.target_text);
    CHECK(ex2.grid.pixels.rgb == ex.grid.pixels.rgb);
  }
  SUBCASE("segment count is always w") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto e = build_grid_caption_example(images, captions, spec, seed);
      std::size_t segments = 0;
      std::size_t pos = 0;
      while ((pos = e.target_text.find("Image ", pos)) != std::string::npos) {
        ++segments;
        pos += 6;
      }
      REQUIRE(segments == 4);
    }
  }
  SUBCASE("too few pairs errors") {
    images.resize(3);
    captions.resize(3);
    CHECK_THROWS(build_grid_caption_example(images, captions, spec, 0));
  }
}

TEST_CASE("cross entropy aspect loss") {
  CHECK(cross_entropy_aspect_loss({"a", "b"}, {1.0, 1.0}) == 0.0);
  CHECK(cross_entropy_aspect_loss({"a"}, {0.25}) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(std::isinf(cross_entropy_aspect_loss({"a", "b"}, {0.5, 0.0})));
  CHECK_THROWS(cross_entropy_aspect_loss({"a"}, {1.5}));
  CHECK_THROWS(cross_entropy_aspect_loss({"a", "b"}, {0.5}));
}

TEST_CASE("bce match loss") {
  CHECK(bce_match_loss({1}, {0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce_match_loss({1, 0}, {1.0 - 1e-9, 1e-9}) == doctest::Approx(0.0).epsilon(1e-6));

  SUBCASE("out-of-range probabilities clamp with warning") {
    std::vector<std::string> warnings;
    const double loss = bce_match_loss({1}, {1.5}, &warnings);
    CHECK(loss == doctest::Approx(-std::log(1.0 - kProbEps)));
    CHECK(warnings.size() == 1);
  }
}

TEST_CASE("joint loss arithmetic") {
  CHECK(joint_loss(1.0, 0.5, 2.0) == 2.0);
  CHECK(joint_loss(0.7, 123.0, 0.0) == 0.7);
  CHECK(kDefaultLambda == 2.0);
  CHECK(kDefaultMaxRefineRounds == 4);
}

TEST_CASE("losses match hand-summed oracles on random fixtures") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(0.01, 0.99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<std::string> words;
    std::vector<double> probs;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      words.push_back("w" + std::to_string(i));
      probs.push_back(uni(rng));
      labels.push_back(static_cast<int>(rng() % 2));
    }
    if (std::find(labels.begin(), labels.end(), 1) == labels.end()) labels[0] = 1;

    double ce = 0.0;
    for (double p : probs) ce += -std::log(p);
    ce /= static_cast<double>(n);
    REQUIRE(cross_entropy_aspect_loss(words, probs) == doctest::Approx(ce).epsilon(1e-12));

    double bce = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      bce += labels[i] ? -std::log(probs[i]) : -std::log(1.0 - probs[i]);
    bce /= static_cast<double>(n);
    REQUIRE(bce_match_loss(labels, probs) == doctest::Approx(bce).epsilon(1e-12));

    const double lam = uni(rng) * 4.0;
    REQUIRE(joint_loss(ce, bce, lam) == doctest::Approx(ce + lam * bce).epsilon(1e-12));
  }
}
