#pragma once

#include <map>
#include <string>
#include <vector>

#include "lenspipe/core.hpp"

namespace lenspipe {

enum class BreakdownDimension { category, candidate_count, history_length };

struct BreakdownBucket {
  std::string label;
  std::size_t n = 0;
  double mrr = 0.0;  // percentage
};

struct EvalReport {
  std::size_t n_examples = 0;
  double hit1 = 0.0;   // percentages
  double hit3 = 0.0;
  double hit10 = 0.0;
  double mrr = 0.0;
  std::map<std::string, std::vector<BreakdownBucket>> breakdowns;
};

// 1-based position of the earliest ground-truth id in the ranking. Throws
// when no ground truth appears (an upstream invariant violation).
std::size_t first_relevant_rank(const std::vector<std::string>& ranking,
                                const std::set<std::string>& gt_ids);

// 100 x fraction of examples whose first relevant rank is <= k. One result
// per example, matched by query_id; a missing result names the query.
double hit_at_k(const std::vector<RankedResult>& results,
                const std::vector<BenchmarkExample>& examples, std::size_t k);

// 100 x mean reciprocal first-relevant rank.
double mrr(const std::vector<RankedResult>& results,
           const std::vector<BenchmarkExample>& examples);

struct BreakdownConfig {
  std::size_t candidate_bin_width = 10;
  std::size_t history_bin_width = 25;
};

// Per-bucket (n, MRR). The N-weighted mean of bucket MRRs equals the global
// MRR (within float accumulation).
std::vector<BreakdownBucket> breakdown(const std::vector<RankedResult>& results,
                                       const std::vector<BenchmarkExample>& examples,
                                       BreakdownDimension dim, const BreakdownConfig& cfg = {});

EvalReport evaluate(const std::vector<RankedResult>& results,
                    const std::vector<BenchmarkExample>& examples,
                    const BreakdownConfig& cfg = {});

// Summary JSON {hit1, hit3, hit10, mrr, n} plus one CSV per breakdown
// dimension (bucket, n, mrr).
void write_report(const EvalReport& report, const std::string& out_dir);

}  // namespace lenspipe
