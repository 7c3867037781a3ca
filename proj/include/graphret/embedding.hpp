#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphret/graph.hpp"
#include "graphret/ranked_list.hpp"

namespace graphret {

using Vector = std::vector<double>;

// Text encoder producing d-dimensional vectors. Implementations must be
// deterministic; if concurrent_safe() is false callers serialize access.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dimension() const = 0;
  virtual Vector encode_query(std::string_view text) const = 0;
  virtual Vector encode_node(std::string_view text) const = 0;

  // Default loops over encode_node. Remote encoders override to batch requests.
  virtual std::vector<Vector> encode_nodes(std::span<const std::string_view> texts) const;

  virtual bool concurrent_safe() const { return true; }
};

// Signed feature hashing of lowercase alphanumeric tokens, L2-normalized.
// Text without tokens maps to the zero vector. Requires d >= 8.
Vector hash_embed(std::string_view text, std::size_t d);

// Lowercased tokens split on ASCII non-alphanumerics (bytes >= 0x80 are kept inside tokens).
std::vector<std::string> tokenize(std::string_view text);

class HashEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashEmbedder(std::size_t d = kDefaultDimension);

  std::size_t dimension() const override { return d_; }
  Vector encode_query(std::string_view text) const override { return hash_embed(text, d_); }
  Vector encode_node(std::string_view text) const override { return hash_embed(text, d_); }

 private:
  std::size_t d_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
// Scales to unit length in place; the zero vector is left unchanged.
void normalize_in_place(std::span<double> v);

// Immutable key -> vector table. Rows are stored in ascending key order.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;

  // Vectors are rounded to float32 precision (the cache's storage type) and,
  // when `normalize` is set, rescaled to unit length.
  static EmbeddingIndex from_rows(std::size_t d, std::vector<std::pair<NodeKey, Vector>> rows, bool normalize);

  std::size_t dimension() const noexcept { return d_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  bool normalized() const noexcept { return normalized_; }

  const std::vector<NodeKey>& keys() const noexcept { return keys_; }
  const NodeKey& key(std::size_t row) const { return keys_[row]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }

  std::optional<std::size_t> find(std::string_view key) const;
  // Throws LookupError naming the key when absent.
  std::span<const double> vector(std::string_view key) const;

  bool operator==(const EmbeddingIndex&) const = default;

 private:
  std::size_t d_ = 0;
  bool normalized_ = true;
  std::vector<NodeKey> keys_;
  std::vector<double> data_;
};

struct IndexOptions {
  bool normalize = true;
  // Binary vector cache. Read when present, written after a fresh build.
  std::optional<std::filesystem::path> cache_path;
  std::size_t batch_size = 64;
  std::size_t threads = 1;
};

EmbeddingIndex build_index(const CorpusGraph& g, const Embedder& emb, const IndexOptions& options = {});

// Cache layout: "GSIX", u32 version, u32 d, u64 count, then per record
// u32 key length, key bytes, d float32 values. All integers little-endian.
void write_vector_cache(const std::filesystem::path& path, const EmbeddingIndex& index);
EmbeddingIndex read_vector_cache(const std::filesystem::path& path, bool normalize);

// Query vectors go through the same rounding/normalization as index rows.
Vector prepare_query(Vector v, const EmbeddingIndex& index);

// Exact top-k by dot product, ordered by (score desc, key asc). k larger than the index returns everything.
RankedList vector_search(std::span<const double> query, const EmbeddingIndex& index, std::size_t k);

}  // namespace graphret
