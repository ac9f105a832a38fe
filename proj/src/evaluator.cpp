#include "lenspipe/evaluator.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace lenspipe {

std::size_t first_relevant_rank(const std::vector<std::string>& ranking,
                                const std::set<std::string>& gt_ids) {
  for (std::size_t i = 0; i < ranking.size(); ++i)
    if (gt_ids.count(ranking[i])) return i + 1;
  throw std::runtime_error("no ground-truth id present in the ranking");
}

namespace {

// first relevant rank per example, results matched by query_id
std::vector<std::size_t> ranks_of(const std::vector<RankedResult>& results,
                                  const std::vector<BenchmarkExample>& examples) {
  std::unordered_map<std::string, const RankedResult*> by_id;
  for (const auto& r : results) by_id[r.query_id] = &r;
  std::vector<std::size_t> ranks;
  ranks.reserve(examples.size());
  for (const auto& ex : examples) {
    auto it = by_id.find(ex.query.query_id);
    if (it == by_id.end())
      throw std::runtime_error("missing result for query '" + ex.query.query_id + "'");
    ranks.push_back(first_relevant_rank(it->second->ranking, ex.ground_truth_ids));
  }
  return ranks;
}

double mrr_of_ranks(const std::vector<std::size_t>& ranks) {
  double sum = 0.0;
  for (std::size_t r : ranks) sum += 1.0 / static_cast<double>(r);
  return 100.0 * sum / static_cast<double>(ranks.size());
}

}  // namespace

double hit_at_k(const std::vector<RankedResult>& results,
                const std::vector<BenchmarkExample>& examples, std::size_t k) {
  if (examples.empty()) throw std::invalid_argument("no examples");
  const auto ranks = ranks_of(results, examples);
  std::size_t hits = 0;
  for (std::size_t r : ranks)
    if (r <= k) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mrr(const std::vector<RankedResult>& results,
           const std::vector<BenchmarkExample>& examples) {
  if (examples.empty()) throw std::invalid_argument("no examples");
  return mrr_of_ranks(ranks_of(results, examples));
}

std::vector<BreakdownBucket> breakdown(const std::vector<RankedResult>& results,
                                       const std::vector<BenchmarkExample>& examples,
                                       BreakdownDimension dim, const BreakdownConfig& cfg) {
  const auto ranks = ranks_of(results, examples);

  auto bucket_label = [&](const BenchmarkExample& ex) -> std::string {
    switch (dim) {
      case BreakdownDimension::category:
        return ex.query.category;
      case BreakdownDimension::candidate_count: {
        const std::size_t lo = ex.candidates.size() / cfg.candidate_bin_width * cfg.candidate_bin_width;
        return std::to_string(lo) + "-" + std::to_string(lo + cfg.candidate_bin_width - 1);
      }
      case BreakdownDimension::history_length: {
        const std::size_t len = static_cast<std::size_t>(ex.history_length);
        const std::size_t lo = len / cfg.history_bin_width * cfg.history_bin_width;
        return std::to_string(lo) + "-" + std::to_string(lo + cfg.history_bin_width - 1);
      }
    }
    throw std::invalid_argument("unknown breakdown dimension");
  };

  std::map<std::string, std::pair<std::size_t, double>> acc;  // label -> (n, sum 1/rank)
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto& slot = acc[bucket_label(examples[i])];
    slot.first += 1;
    slot.second += 1.0 / static_cast<double>(ranks[i]);
  }
  std::vector<BreakdownBucket> out;
  for (const auto& [label, slot] : acc)
    out.push_back({label, slot.first, 100.0 * slot.second / static_cast<double>(slot.first)});
  return out;
}

EvalReport evaluate(const std::vector<RankedResult>& results,
                    const std::vector<BenchmarkExample>& examples, const BreakdownConfig& cfg) {
  EvalReport rep;
  rep.n_examples = examples.size();
  rep.hit1 = hit_at_k(results, examples, 1);
  rep.hit3 = hit_at_k(results, examples, 3);
  rep.hit10 = hit_at_k(results, examples, 10);
  rep.mrr = mrr(results, examples);
  rep.breakdowns["category"] = breakdown(results, examples, BreakdownDimension::category, cfg);
  rep.breakdowns["candidate_count"] =
      breakdown(results, examples, BreakdownDimension::candidate_count, cfg);
  rep.breakdowns["history_length"] =
      breakdown(results, examples, BreakdownDimension::history_length, cfg);
  return rep;
}

void write_report(const EvalReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json summary{{"hit1", report.hit1},
                         {"hit3", report.hit3},
                         {"hit10", report.hit10},
                         {"mrr", report.mrr},
                         {"n", report.n_examples}};
  std::ofstream js((std::filesystem::path(out_dir) / "summary.json").string());
  js << summary.dump(2) << '\n';

  for (const auto& [dim, buckets] : report.breakdowns) {
    std::ofstream csv((std::filesystem::path(out_dir) / (dim + ".csv")).string());
    csv << "bucket,n,mrr\n";
    for (const auto& b : buckets) csv << b.label << ',' << b.n << ',' << b.mrr << '\n';
  }
}

}  // namespace lenspipe
