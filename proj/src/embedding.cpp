#include "graphret/embedding.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include "graphret/error.hpp"

namespace graphret {

std::vector<Vector> Embedder::encode_nodes(std::span<const std::string_view> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (auto t : texts) out.push_back(encode_node(t));
  return out;
}

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

bool is_token_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Vector hash_embed(std::string_view text, std::size_t d) {
  if (d < 8) throw ValidationError("hash_embed dimension must be at least 8");
  Vector v(d, 0.0);
  for (const auto& tok : tokenize(text)) {
    const std::uint64_t h = mix64(fnv1a(tok));
    v[static_cast<std::size_t>(h % d)] += (h >> 63) ? -1.0 : 1.0;
  }
  normalize_in_place(v);
  return v;
}

HashEmbedder::HashEmbedder(std::size_t d) : d_(d) {
  if (d < 8) throw ValidationError("hash embedder dimension must be at least 8");
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionError("dot product of vectors with lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void normalize_in_place(std::span<double> v) {
  const double n = l2_norm(v);
  if (n == 0.0) return;
  for (double& x : v) x /= n;
}

EmbeddingIndex EmbeddingIndex::from_rows(std::size_t d, std::vector<std::pair<NodeKey, Vector>> rows,
                                         bool normalize) {
  if (d == 0) throw DimensionError("embedding dimension must be positive");
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  EmbeddingIndex idx;
  idx.d_ = d;
  idx.normalized_ = normalize;
  idx.keys_.reserve(rows.size());
  idx.data_.reserve(rows.size() * d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& [key, vec] = rows[r];
    if (r > 0 && key == rows[r - 1].first) throw ValidationError("duplicate key in embedding index: " + key);
    if (vec.size() != d)
      throw DimensionError("vector for " + key + " has length " + std::to_string(vec.size()) + ", expected " +
                           std::to_string(d));
    for (double& x : vec) {
      if (!std::isfinite(x)) throw ValidationError("non-finite vector entry for " + key);
      x = static_cast<double>(static_cast<float>(x));
    }
    if (normalize) normalize_in_place(vec);
    idx.keys_.push_back(std::move(key));
    idx.data_.insert(idx.data_.end(), vec.begin(), vec.end());
  }
  return idx;
}

std::optional<std::size_t> EmbeddingIndex::find(std::string_view key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - keys_.begin());
}

std::span<const double> EmbeddingIndex::vector(std::string_view key) const {
  auto r = find(key);
  if (!r) throw LookupError("node missing from embedding index: " + std::string(key));
  return row(*r);
}

namespace {

constexpr std::array<char, 4> kCacheMagic{'G', 'S', 'I', 'X'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw CacheError("truncated vector cache: " + path.string());
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
  return static_cast<T>(u);
}

}  // namespace

void write_vector_cache(const std::filesystem::path& path, const EmbeddingIndex& index) {
  std::string out(kCacheMagic.begin(), kCacheMagic.end());
  put_le<std::uint32_t>(out, kCacheVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dimension()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(index.size()));
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto& key = index.key(r);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(key.size()));
    out += key;
    for (double x : index.row(r)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CacheError("cannot write vector cache: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw CacheError("write failed for vector cache: " + path.string());
}

EmbeddingIndex read_vector_cache(const std::filesystem::path& path, bool normalize) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("cannot open vector cache: " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kCacheMagic) throw CacheError("bad vector cache magic: " + path.string());
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != kCacheVersion) throw CacheError("unsupported vector cache version " + std::to_string(version));
  const auto d = get_le<std::uint32_t>(in, path);
  const auto count = get_le<std::uint64_t>(in, path);
  if (d == 0) throw CacheError("vector cache has zero dimension");
  std::vector<std::pair<NodeKey, Vector>> rows;
  rows.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = get_le<std::uint32_t>(in, path);
    std::string key(len, '\0');
    if (!in.read(key.data(), len)) throw CacheError("truncated vector cache: " + path.string());
    Vector v(d);
    for (auto& x : v) x = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(in, path)));
    rows.emplace_back(std::move(key), std::move(v));
  }
  return EmbeddingIndex::from_rows(d, std::move(rows), normalize);
}

namespace {

std::vector<std::pair<NodeKey, Vector>> encode_all(const CorpusGraph& g, const Embedder& emb,
                                                    const IndexOptions& options) {
  const std::size_t n = g.node_count();
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  const std::size_t batches = (n + batch - 1) / batch;
  std::vector<std::pair<NodeKey, Vector>> rows(n);

  auto run_batch = [&](std::size_t b) {
    const std::size_t lo = b * batch;
    const std::size_t hi = std::min(n, lo + batch);
    std::vector<std::string_view> texts;
    for (std::size_t i = lo; i < hi; ++i) texts.emplace_back(g.node(static_cast<CorpusGraph::Id>(i)).content);
    std::vector<Vector> vecs;
    try {
      vecs = emb.encode_nodes(texts);
    } catch (const std::exception& batch_error) {
      // Retry one by one to name the node that fails.
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          emb.encode_node(texts[i - lo]);
        } catch (const std::exception& e) {
          throw ModelError("encoder failed on node " + g.key(static_cast<CorpusGraph::Id>(i)) + ": " + e.what());
        }
      }
      throw ModelError("encoder failed on nodes " + g.key(static_cast<CorpusGraph::Id>(lo)) + " to " +
                       g.key(static_cast<CorpusGraph::Id>(hi - 1)) + ": " + batch_error.what());
    }
    if (vecs.size() != hi - lo)
      throw ModelError("encoder returned " + std::to_string(vecs.size()) + " vectors for a batch of " +
                       std::to_string(hi - lo) + " starting at node " + g.key(static_cast<CorpusGraph::Id>(lo)));
    for (std::size_t i = lo; i < hi; ++i) {
      const auto& key = g.key(static_cast<CorpusGraph::Id>(i));
      if (vecs[i - lo].size() != emb.dimension())
        throw DimensionError("encoder returned a vector of length " + std::to_string(vecs[i - lo].size()) +
                             " for node " + key);
      rows[i] = {key, std::move(vecs[i - lo])};
    }
  };

  const std::size_t threads = emb.concurrent_safe() ? std::min(options.threads, batches) : 1;
  if (threads <= 1) {
    for (std::size_t b = 0; b < batches; ++b) run_batch(b);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t b; (b = next.fetch_add(1)) < batches;) {
        try {
          run_batch(b);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = batches;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace

EmbeddingIndex build_index(const CorpusGraph& g, const Embedder& emb, const IndexOptions& options) {
  if (options.cache_path && std::filesystem::exists(*options.cache_path)) {
    auto cached = read_vector_cache(*options.cache_path, options.normalize);
    if (cached.dimension() != emb.dimension())
      throw CacheError("vector cache " + options.cache_path->string() + " has dimension " +
                       std::to_string(cached.dimension()) + " but the embedder produces " +
                       std::to_string(emb.dimension()));
    if (cached.size() != g.node_count())
      throw CacheError("vector cache " + options.cache_path->string() + " holds " + std::to_string(cached.size()) +
                       " vectors for a graph of " + std::to_string(g.node_count()) + " nodes");
    for (std::size_t i = 0; i < cached.size(); ++i) {
      if (cached.key(i) != g.key(static_cast<CorpusGraph::Id>(i)))
        throw CacheError("vector cache " + options.cache_path->string() + " does not cover node " +
                         g.key(static_cast<CorpusGraph::Id>(i)));
    }
    return cached;
  }
  auto index = EmbeddingIndex::from_rows(emb.dimension(), encode_all(g, emb, options), options.normalize);
  if (options.cache_path) write_vector_cache(*options.cache_path, index);
  return index;
}

Vector prepare_query(Vector v, const EmbeddingIndex& index) {
  if (v.size() != index.dimension())
    throw DimensionError("query vector has length " + std::to_string(v.size()) + ", index dimension is " +
                         std::to_string(index.dimension()));
  if (index.normalized()) normalize_in_place(v);
  return v;
}

RankedList vector_search(std::span<const double> query, const EmbeddingIndex& index, std::size_t k) {
  if (k == 0) throw ValidationError("vector_search requires k >= 1");
  if (index.empty()) throw ValidationError("vector_search on an empty index");
  if (query.size() != index.dimension())
    throw DimensionError("query vector has length " + std::to_string(query.size()) + ", index dimension is " +
                         std::to_string(index.dimension()));
  const std::size_t n = index.size();
  std::vector<double> scores(n);
  for (std::size_t r = 0; r < n; ++r) scores[r] = dot(query, index.row(r));
  std::vector<std::size_t> order(n);
  for (std::size_t r = 0; r < n; ++r) order[r] = r;
  // Rows are key-sorted, so a smaller row index is the key-ascending tie-break.
  auto better = [&](std::size_t a, std::size_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; };
  const std::size_t take = std::min(k, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
  std::vector<ScoredNode> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({index.key(order[i]), scores[order[i]]});
  return RankedList(std::move(out));
}

}  // namespace graphret
