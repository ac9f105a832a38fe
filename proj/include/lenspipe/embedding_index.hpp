#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lenspipe/core.hpp"

namespace lenspipe {

// Normalized mean embedding of n sampled item-image embeddings for one category.
struct CategoryCentroid {
  std::string category;
  Embedding centroid;
  std::uint64_t sample_size = 0;  // number of vectors actually averaged
  std::uint64_t sample_seed = 0;
};

struct RetrievalResult {
  std::vector<std::string> image_ids;   // length = min(w, |history|)
  std::vector<double> similarities;     // parallel, non-increasing
};

// Flat store of L2-normalized embeddings, keyed by image id. Single-writer
// during ingest, immutable afterwards; readers may then share it freely.
class EmbeddingIndex {
 public:
  // Normalizes and stores. The first ingest fixes the index dimension.
  // Re-ingesting an identical (id, vector) pair is a no-op; a different
  // vector under an existing id is rejected.
  const Embedding& ingest(const std::string& image_id, std::span<const float> raw);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return order_.size(); }
  bool contains(const std::string& image_id) const { return by_id_.count(image_id) != 0; }
  const Embedding& get(const std::string& image_id) const;

  const std::vector<std::string>& ids() const { return order_; }

  // Binary store: magic "LENSEMB1", dim u32 LE, count u64 LE, then per record
  // id length u32 LE + UTF-8 id + dim f32 LE. Bit-exact round trip.
  void save(const std::string& path) const;
  static EmbeddingIndex load(const std::string& path);

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> order_;  // ingest order, used by save()
  std::unordered_map<std::string, Embedding> by_id_;
};

// Samples min(n, |pool|) vectors uniformly without replacement using seed and
// returns the L2-normalized arithmetic mean. Deterministic given seed.
CategoryCentroid build_centroid(const std::string& category, const std::vector<Embedding>& pool,
                                std::size_t n, std::uint64_t seed);

// Top-w cosine retrieval over one user's history against a category centroid.
// Order: similarity descending, ties by ascending taken_order. Every history
// image must be present in the index. OpenMP-parallel similarity scan.
RetrievalResult retrieve_top_w(const VisualHistory& history, const EmbeddingIndex& index,
                               const CategoryCentroid& centroid, std::size_t w);

// Serial reference: full brute-force sort over all cosines. Kept for testing
// and benchmarking against the parallel kernel.
RetrievalResult retrieve_top_w_serial(const VisualHistory& history, const EmbeddingIndex& index,
                                      const CategoryCentroid& centroid, std::size_t w);

}  // namespace lenspipe
