#include "lenspipe/refine_train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "lenspipe/serde.hpp"
#include "lenspipe/util.hpp"

namespace lenspipe {

RefinementState RefinementState::initial(std::string image_id, std::vector<std::string> w0) {
  RefinementState s;
  s.image_id = std::move(image_id);
  s.round = 0;
  s.word_sets.push_back(std::move(w0));
  return s;
}

RefinementState refine_round(RefinementState state, const AspectSelector& selector,
                             const std::vector<std::string>& ground_truths, int max_rounds,
                             std::vector<std::string>* warnings) {
  if (state.round >= max_rounds)
    throw std::logic_error("refine_round past max_rounds for image '" + state.image_id + "'");
  if (state.converged) return state;

  const std::vector<std::string>& prev = state.current();
  std::unordered_set<std::string> allowed(prev.begin(), prev.end());

  std::vector<std::string> selected = selector(prev, ground_truths);
  std::vector<std::string> next;
  std::unordered_set<std::string> taken;
  for (const auto& w : selected) {
    if (!allowed.count(w)) {
      if (warnings)
        warnings->push_back("selector emitted word '" + w + "' outside W^(j-1); dropped");
      continue;
    }
    if (taken.insert(w).second) next.push_back(w);
  }
  // keep W^(j-1)'s order so set equality is order-insensitive
  std::vector<std::string> ordered;
  for (const auto& w : prev)
    if (taken.count(w)) ordered.push_back(w);

  if (ordered.empty()) {
    state.converged = true;  // empty selection: keep W^(j-1)
    return state;
  }
  state.round += 1;
  const bool fixpoint = ordered.size() == prev.size();
  state.word_sets.push_back(std::move(ordered));
  if (fixpoint || state.round == max_rounds) state.converged = true;
  return state;
}

RefinementState run_refinement(RefinementState state, const AspectSelector& selector,
                               const std::vector<std::string>& ground_truths, int max_rounds,
                               std::vector<std::string>* warnings) {
  while (!state.converged && state.round < max_rounds)
    state = refine_round(std::move(state), selector, ground_truths, max_rounds, warnings);
  state.converged = true;
  return state;
}

AspectSelector gt_containment_selector() {
  return [](const std::vector<std::string>& current, const std::vector<std::string>& gts) {
    std::unordered_set<std::string> gt_tokens;
    for (const auto& text : gts)
      for (auto& t : tokenize_words(text)) gt_tokens.insert(std::move(t));
    std::vector<std::string> out;
    for (const auto& w : current)
      if (gt_tokens.count(w)) out.push_back(w);
    return out;
  };
}

GridCaptionExample build_grid_caption_example(const std::vector<SourceImage>& images,
                                              const std::vector<std::string>& captions,
                                              const GridSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (images.size() != captions.size())
    throw std::invalid_argument("images/captions length mismatch");
  const std::size_t w = static_cast<std::size_t>(spec.d) * spec.d;
  if (images.size() < w)
    throw std::invalid_argument("need at least " + std::to_string(w) + " image/caption pairs, got " +
                                std::to_string(images.size()));

  std::vector<std::size_t> idx(images.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < w; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }

  std::vector<SourceImage> sampled;
  GridCaptionExample ex;
  std::string target;
  for (std::size_t i = 0; i < w; ++i) {
    sampled.push_back(images[idx[i]]);
    ex.sampled_ids.push_back(images[idx[i]].image_id);
    if (i > 0) target += ", ";
    target += "Image " + std::to_string(i + 1) + ": " + captions[idx[i]];
  }
  ex.grid = gridify(sampled, spec);
  ex.target_text = std::move(target);
  return ex;
}

double cross_entropy_aspect_loss(const std::vector<std::string>& target_words,
                                 const std::vector<double>& token_probs) {
  if (target_words.size() != token_probs.size())
    throw std::invalid_argument("target/probability length mismatch");
  if (token_probs.empty()) throw std::invalid_argument("empty target sequence");
  double sum = 0.0;
  for (std::size_t i = 0; i < token_probs.size(); ++i) {
    const double p = token_probs[i];
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("probability out of [0,1] for token '" + target_words[i] + "'");
    if (p == 0.0) return std::numeric_limits<double>::infinity();
    sum -= std::log(p);
  }
  return sum / static_cast<double>(token_probs.size());
}

double bce_match_loss(const std::vector<int>& labels, const std::vector<double>& probs,
                      std::vector<std::string>* warnings) {
  if (labels.size() != probs.size()) throw std::invalid_argument("labels/probs length mismatch");
  if (labels.empty()) throw std::invalid_argument("empty candidate set");
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double p = probs[i];
    if (p <= 0.0 || p >= 1.0) {
      if (warnings)
        warnings->push_back("probability " + std::to_string(p) + " at index " + std::to_string(i) +
                            " clamped");
      p = std::clamp(p, kProbEps, 1.0 - kProbEps);
    }
    const double y = labels[i] ? 1.0 : 0.0;
    sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return sum / static_cast<double>(labels.size());
}

double joint_loss(double l_asp, double l_pred, double lambda) {
  return l_asp + lambda * l_pred;
}

void export_grid_caption_examples(const std::string& jsonl_path, const std::string& grid_dir,
                                  const std::vector<GridCaptionExample>& examples) {
  std::filesystem::create_directories(grid_dir);
  std::vector<nlohmann::json> records;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::string png_path =
        (std::filesystem::path(grid_dir) / ("grid_caption_" + std::to_string(i) + ".png")).string();
    write_png(png_path, examples[i].grid.pixels);
    records.push_back(nlohmann::json{{"schema", kSchemaTag},
                                     {"grid_png_path", png_path},
                                     {"target_text", examples[i].target_text}});
  }
  write_jsonl(jsonl_path, records);
}

void export_joint_examples(const std::string& jsonl_path,
                           const std::vector<JointExample>& examples) {
  std::vector<nlohmann::json> records;
  for (const auto& ex : examples) {
    if (std::find(ex.labels.begin(), ex.labels.end(), 1) == ex.labels.end())
      throw std::invalid_argument("joint example without a positive label");
    records.push_back(
        nlohmann::json{{"schema", kSchemaTag},
                       {"aspect",
                        {{"image_ref", ex.image_ref},
                         {"prompt", ex.aspect_prompt},
                         {"target_words", ex.target_words}}},
                       {"match",
                        {{"prompt", ex.match_prompt},
                         {"grid_png_path", ex.grid_ref},
                         {"labels", ex.labels}}},
                       {"lambda", ex.lambda}});
  }
  write_jsonl(jsonl_path, records);
}

}  // namespace lenspipe
