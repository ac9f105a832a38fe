#include "lenspipe/embedding_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace lenspipe {

const Embedding& EmbeddingIndex::ingest(const std::string& image_id, std::span<const float> raw) {
  if (dim_ != 0 && raw.size() != dim_)
    throw std::invalid_argument("dim mismatch: index dim " + std::to_string(dim_) + ", got " +
                                std::to_string(raw.size()));
  Embedding e = Embedding::normalized(raw);
  auto it = by_id_.find(image_id);
  if (it != by_id_.end()) {
    if (it->second.values != e.values)
      throw std::invalid_argument("image '" + image_id + "' already ingested with a different vector");
    return it->second;  // idempotent re-ingest
  }
  if (dim_ == 0) dim_ = raw.size();
  order_.push_back(image_id);
  return by_id_.emplace(image_id, std::move(e)).first->second;
}

const Embedding& EmbeddingIndex::get(const std::string& image_id) const {
  auto it = by_id_.find(image_id);
  if (it == by_id_.end())
    throw std::out_of_range("no embedding for image '" + image_id + "'");
  return it->second;
}

namespace {
constexpr char kMagic[8] = {'L', 'E', 'N', 'S', 'E', 'M', 'B', '1'};

template <typename T>
void write_le(std::ofstream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}
}  // namespace

void EmbeddingIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(order_.size()));
  for (const auto& id : order_) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    const auto& vals = by_id_.at(id).values;
    for (float f : vals) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof(bits));
      write_le<std::uint32_t>(out, bits);
    }
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

EmbeddingIndex EmbeddingIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path + ": bad magic, not a LENSEMB1 store");
  const auto dim = read_le<std::uint32_t>(in);
  const auto count = read_le<std::uint64_t>(in);
  EmbeddingIndex idx;
  idx.dim_ = dim;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto idlen = read_le<std::uint32_t>(in);
    std::string id(idlen, '\0');
    in.read(id.data(), idlen);
    Embedding e;
    e.values.resize(dim);
    for (std::uint32_t k = 0; k < dim; ++k) {
      const std::uint32_t bits = read_le<std::uint32_t>(in);
      std::memcpy(&e.values[k], &bits, sizeof(float));
    }
    if (!in) throw std::runtime_error(path + ": truncated record " + std::to_string(i));
    idx.order_.push_back(id);
    idx.by_id_.emplace(std::move(id), std::move(e));
  }
  return idx;
}

CategoryCentroid build_centroid(const std::string& category, const std::vector<Embedding>& pool,
                                std::size_t n, std::uint64_t seed) {
  if (pool.empty()) throw std::invalid_argument("empty category pool for '" + category + "'");
  if (n == 0) throw std::invalid_argument("centroid sample size must be >= 1");
  const std::size_t take = std::min(n, pool.size());
  const std::size_t dim = pool.front().dim();

  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates: first `take` positions are a uniform sample
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }

  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < take; ++i) {
    const auto& v = pool[idx[i]].values;
    if (v.size() != dim) throw std::invalid_argument("inconsistent dims in centroid pool");
    for (std::size_t k = 0; k < dim; ++k) mean[k] += v[k];
  }
  std::vector<float> raw(dim);
  for (std::size_t k = 0; k < dim; ++k) raw[k] = static_cast<float>(mean[k] / take);

  CategoryCentroid c;
  c.category = category;
  c.centroid = Embedding::normalized(raw);
  c.sample_size = take;
  c.sample_seed = seed;
  return c;
}

namespace {

RetrievalResult finish_topw(const VisualHistory& history, std::vector<double>&& sims,
                            std::size_t w) {
  std::vector<std::size_t> order(history.items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return history.items[a].image.taken_order < history.items[b].image.taken_order;
  });
  const std::size_t k = std::min(w, order.size());
  RetrievalResult r;
  r.image_ids.reserve(k);
  r.similarities.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    r.image_ids.push_back(history.items[order[i]].image.image_id);
    r.similarities.push_back(sims[order[i]]);
  }
  return r;
}

}  // namespace

RetrievalResult retrieve_top_w(const VisualHistory& history, const EmbeddingIndex& index,
                               const CategoryCentroid& centroid, std::size_t w) {
  if (w == 0) throw std::invalid_argument("w must be >= 1");
  const std::size_t count = history.items.size();
  // resolve embeddings up front so the missing-id error names the image
  std::vector<const Embedding*> embs(count);
  for (std::size_t i = 0; i < count; ++i)
    embs[i] = &index.get(history.items[i].image.image_id);

  std::vector<double> sims(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i)
    sims[static_cast<std::size_t>(i)] = embs[static_cast<std::size_t>(i)]->dot(centroid.centroid);
  return finish_topw(history, std::move(sims), w);
}

RetrievalResult retrieve_top_w_serial(const VisualHistory& history, const EmbeddingIndex& index,
                                      const CategoryCentroid& centroid, std::size_t w) {
  if (w == 0) throw std::invalid_argument("w must be >= 1");
  std::vector<double> sims(history.items.size());
  for (std::size_t i = 0; i < history.items.size(); ++i)
    sims[i] = index.get(history.items[i].image.image_id).dot(centroid.centroid);
  return finish_topw(history, std::move(sims), w);
}

}  // namespace lenspipe
