#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lenspipe/grid.hpp"

namespace lenspipe {

constexpr int kDefaultMaxRefineRounds = 4;
constexpr double kDefaultLambda = 2.0;
constexpr double kProbEps = 1e-7;

// Aspect-word refinement trace for one image: W^(0) ⊇ W^(1) ⊇ ... ⊇ W^(round).
struct RefinementState {
  std::string image_id;
  int round = 0;
  std::vector<std::vector<std::string>> word_sets;  // word_sets[j] = W^(j)
  bool converged = false;

  static RefinementState initial(std::string image_id, std::vector<std::string> w0);
  const std::vector<std::string>& current() const { return word_sets.back(); }
};

// Judge receiving (W^(j-1), ground-truth texts) and returning the words it
// deems useful. Output is intersected with W^(j-1); out-of-set words are
// dropped with a warning.
using AspectSelector = std::function<std::vector<std::string>(
    const std::vector<std::string>& current, const std::vector<std::string>& ground_truths)>;

// One refinement round. Terminal (converged) when the selection equals the
// previous set, when the selector returns nothing usable, or when
// round == max_rounds. Throws if called past max_rounds.
RefinementState refine_round(RefinementState state, const AspectSelector& selector,
                             const std::vector<std::string>& ground_truths,
                             int max_rounds = kDefaultMaxRefineRounds,
                             std::vector<std::string>* warnings = nullptr);

// Runs rounds until convergence or the round cap.
RefinementState run_refinement(RefinementState state, const AspectSelector& selector,
                               const std::vector<std::string>& ground_truths,
                               int max_rounds = kDefaultMaxRefineRounds,
                               std::vector<std::string>* warnings = nullptr);

// Deterministic test judge: keeps words that appear in any ground-truth text.
AspectSelector gt_containment_selector();

struct GridCaptionExample {
  GridImage grid;
  std::vector<std::string> sampled_ids;  // cell order
  std::string target_text;               // "Image 1: x1, Image 2: x2, ..."
};

// Samples w (image, caption) pairs without replacement by seed, gridifies,
// and renders the caption target. Throws when fewer than w pairs exist.
GridCaptionExample build_grid_caption_example(const std::vector<SourceImage>& images,
                                              const std::vector<std::string>& captions,
                                              const GridSpec& spec, std::uint64_t seed);

struct JointExample {
  // aspect part
  std::string image_ref;
  std::string aspect_prompt;
  std::vector<std::string> target_words;
  // match part
  std::string match_prompt;
  std::string grid_ref;
  std::vector<int> labels;  // 0/1 per candidate, >= 1 positive
  double lambda = kDefaultLambda;
};

// Mean negative log-likelihood of the target token sequence given per-token
// probabilities. Zero probability on a target token yields +infinity.
double cross_entropy_aspect_loss(const std::vector<std::string>& target_words,
                                 const std::vector<double>& token_probs);

// Mean binary cross-entropy; probabilities outside (0,1) are clamped to
// [eps, 1-eps] with a warning.
double bce_match_loss(const std::vector<int>& labels, const std::vector<double>& probs,
                      std::vector<std::string>* warnings = nullptr);

// l_asp + lambda * l_pred.
double joint_loss(double l_asp, double l_pred, double lambda);

// Training export JSONL records.
void export_grid_caption_examples(const std::string& jsonl_path, const std::string& grid_dir,
                                  const std::vector<GridCaptionExample>& examples);
void export_joint_examples(const std::string& jsonl_path,
                           const std::vector<JointExample>& examples);

}  // namespace lenspipe
