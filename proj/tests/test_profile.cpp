#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "lenspipe/profile.hpp"

using namespace lenspipe;

namespace {

// deterministic provider: caption/aspects derived from the image id
class FixedProvider : public AugmenterProvider {
 public:
  bool fail_augment_for(const std::string& id) { return fail_ids_.count(id) != 0; }
  void set_failing(std::string id) { fail_ids_.insert(std::move(id)); }
  void set_caption(std::string id, std::string caption) { captions_[std::move(id)] = std::move(caption); }

  AugmenterResponse augment(const AugmenterRequest& req) override {
    if (fail_ids_.count(req.image_id)) throw std::runtime_error("provider down");
    AugmenterResponse r{req.image_id, req.task, {}};
    if (req.task == AugmentTask::caption) {
      auto it = captions_.find(req.image_id);
      r.output_text = it != captions_.end() ? it->second : "a photo of " + req.image_id;
    } else {
      r.output_text = "Dome, balcony, Dome";
    }
    return r;
  }

  std::vector<float> embed(const std::string& image_id) override {
    // id-derived direction, never zero
    return {static_cast<float>(image_id.size()), 1.0f};
  }

 private:
  std::set<std::string> fail_ids_;
  std::map<std::string, std::string> captions_;
};

std::vector<ImageRecord> images(int n) {
  std::vector<ImageRecord> out;
  for (int i = 0; i < n; ++i) out.push_back({"im" + std::to_string(i), "", 0, 0, i});
  return out;
}

}  // namespace

TEST_CASE("build_profile constructs one triplet per image in order") {
  FixedProvider provider;
  EmbeddingIndex index;
  auto history = build_profile("u1", images(3), provider, index);
  REQUIRE(history.items.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(history.items[i].image.image_id == "im" + std::to_string(i));
    CHECK(history.items[i].image.taken_order == i);
    CHECK(history.items[i].aspect_words == std::vector<std::string>{"dome", "balcony"});
    CHECK_FALSE(history.items[i].degraded);
  }
  CHECK(index.size() == 3);
}

TEST_CASE("long captions are truncated with a warning") {
  FixedProvider provider;
  std::string long_caption;
  for (int i = 0; i < 35; ++i) long_caption += "word" + std::to_string(i) + " ";
  provider.set_caption("im0", long_caption);
  EmbeddingIndex index;
  std::vector<std::string> warnings;
  auto history = build_profile("u1", images(1), provider, index, {}, &warnings);
  int words = 1;
  for (char c : history.items[0].caption)
    if (c == ' ') ++words;
  CHECK(words == 30);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("truncated") != std::string::npos);
}

TEST_CASE("augment failure degrades the triplet, embedding stays") {
  FixedProvider provider;
  provider.set_failing("im1");
  EmbeddingIndex index;
  auto history = build_profile("u1", images(3), provider, index);
  REQUIRE(history.items.size() == 3);
  CHECK(history.items[1].degraded);
  CHECK(history.items[1].caption.empty());
  CHECK(history.items[1].aspect_words.empty());
  CHECK_FALSE(history.items[1].embedding.values.empty());
}

TEST_CASE("build_profile is deterministic given a deterministic provider") {
  FixedProvider provider;
  EmbeddingIndex index_a, index_b;
  auto a = build_profile("u1", images(5), provider, index_a);
  auto b = build_profile("u1", images(5), provider, index_b);
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].caption == b.items[i].caption);
    CHECK(a.items[i].embedding.values == b.items[i].embedding.values);
  }
}

TEST_CASE("build_profile rejects empty input") {
  FixedProvider provider;
  EmbeddingIndex index;
  CHECK_THROWS(build_profile("u1", {}, provider, index));
}

TEST_CASE("aspect prompt rendering") {
  SUBCASE("default template renders verbatim (no slot values)") {
    auto tmpl = PromptTemplate::load(default_aspect_template_text());
    CHECK(render_aspect_prompt("img") == tmpl.render({}));
  }
  SUBCASE("category slot substitution") {
    ProfileBuildOptions opts;
    opts.aspect_template = PromptTemplate::load("Aspects for a [[Category]] photo: [[Answer]]");
    opts.category = "museum";
    CHECK(render_aspect_prompt("img", opts) == "Aspects for a museum photo: ");
  }
  SUBCASE("unknown slot fails at load") {
    CHECK_THROWS_WITH(PromptTemplate::load("hello [[Nope]]"), doctest::Contains("Nope"));
  }
  SUBCASE("unterminated slot fails at load") {
    CHECK_THROWS(PromptTemplate::load("hello [[Answer"));
  }
}

TEST_CASE("profile jsonl round trip") {
  FixedProvider provider;
  EmbeddingIndex index;
  auto history = build_profile("u1", images(4), provider, index);
  const auto path = std::filesystem::temp_directory_path() / "lenspipe_profile_test.jsonl";
  save_profile_jsonl(path.string(), history, "store.bin");
  auto back = load_profile_jsonl(path.string(), index);
  REQUIRE(back.items.size() == history.items.size());
  CHECK(back.user_id == "u1");
  for (std::size_t i = 0; i < back.items.size(); ++i) {
    CHECK(back.items[i].image.image_id == history.items[i].image.image_id);
    CHECK(back.items[i].caption == history.items[i].caption);
    CHECK(back.items[i].aspect_words == history.items[i].aspect_words);
  }
  std::filesystem::remove(path);
}
