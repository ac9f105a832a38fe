#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lenspipe/core.hpp"
#include "lenspipe/embedding_index.hpp"
#include "lenspipe/prompt_template.hpp"

namespace lenspipe {

enum class AugmentTask { caption, aspects };

struct AugmenterRequest {
  std::string image_id;
  AugmentTask task;
  std::string prompt_text;  // rendered template for the task
};

struct AugmenterResponse {
  std::string image_id;
  AugmentTask task;
  std::string output_text;
};

// External caption/aspect/embedding provider. Implementations: remote HTTP
// service, deterministic mocks in tests.
class AugmenterProvider {
 public:
  virtual ~AugmenterProvider() = default;
  // Throwing marks the triplet degraded (embedding still mandatory).
  virtual AugmenterResponse augment(const AugmenterRequest& req) = 0;
  virtual std::vector<float> embed(const std::string& image_id) = 0;
};

// HTTP provider over the shared augmenter wire protocol:
//   POST /augment  {image_ref, task, prompt_text} -> {output_text}
//   POST /embed    {image_ref} -> {embedding:[float,...]}
class RemoteAugmenter final : public AugmenterProvider {
 public:
  RemoteAugmenter(std::string host, int port, int timeout_ms = 5000);
  AugmenterResponse augment(const AugmenterRequest& req) override;
  std::vector<float> embed(const std::string& image_id) override;

 private:
  std::string host_;
  int port_;
  int timeout_ms_;
};

struct ProfileBuildOptions {
  PromptTemplate caption_template = PromptTemplate::load(default_caption_template_text());
  PromptTemplate aspect_template = PromptTemplate::load(default_aspect_template_text());
  std::string category;  // fills [[Category]] when the template uses it
};

std::string render_aspect_prompt(const std::string& image_id, const ProfileBuildOptions& opts);
std::string render_aspect_prompt(const std::string& image_id);

// Builds one SpectrumTriplet per image (degraded ones included), in
// taken_order, ingesting embeddings into `index`. Captions over 30 words are
// truncated with a warning appended to `warnings` (when non-null). Throws if
// images is empty or every image fails.
VisualHistory build_profile(const std::string& user_id, const std::vector<ImageRecord>& images,
                            AugmenterProvider& provider, EmbeddingIndex& index,
                            const ProfileBuildOptions& opts = {},
                            std::vector<std::string>* warnings = nullptr);

// One JSONL record per triplet:
// {schema, user_id, image_id, taken_order, caption, aspects[], embedding_ref, degraded}
void save_profile_jsonl(const std::string& path, const VisualHistory& history,
                        const std::string& embedding_ref);
VisualHistory load_profile_jsonl(const std::string& path, const EmbeddingIndex& index);

}  // namespace lenspipe
