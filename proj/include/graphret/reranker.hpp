#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "graphret/embedding.hpp"
#include "graphret/graph.hpp"
#include "graphret/ranked_list.hpp"

namespace graphret {

// Query-conditioned latent vectors, one row per entry of the ranked list they were extracted for.
struct LatentBatch {
  std::vector<NodeKey> keys;
  Eigen::MatrixXd values;  // keys.size() x latent dimension

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
};

// Cross-encoder style scorer split into its two stages: latent extraction for a
// (query, document) pair, then a scoring head. GRanker mixes latents between the stages.
class Reranker {
 public:
  virtual ~Reranker() = default;

  virtual std::size_t latent_dimension() const = 0;
  virtual Vector extract_latent(std::string_view query, std::string_view content) const = 0;
  // One row per content. Default loops over extract_latent.
  virtual Eigen::MatrixXd extract_latents(std::string_view query, std::span<const std::string_view> contents) const;
  virtual double head_score(std::span<const double> latent) const = 0;

  virtual bool concurrent_safe() const { return true; }

  double score(std::string_view query, std::string_view content) const {
    auto h = extract_latent(query, content);
    return head_score(h);
  }
};

// One affine layer, or two with a ReLU in between, ending in a single output.
class AffineHead {
 public:
  struct Layer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;     // out
  };

  AffineHead() = default;
  explicit AffineHead(std::vector<Layer> layers);

  // {"weights": [[...]], "bias": [...]} or {"layers": [{"weights":..,"bias":..}, {...}]}.
  static AffineHead from_json(const nlohmann::json& spec);
  static AffineHead load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Single linear layer with weights 1 + spread * u, u uniform in [-1, 1] drawn from a
  // seeded mt19937_64; bias 0. Identical across platforms.
  static AffineHead seeded_linear(std::size_t input_dim, std::uint64_t seed, double spread = 0.1);
  // Sum of the latent entries. On elementwise-product latents this is the plain dot product.
  static AffineHead sum(std::size_t input_dim);

  std::size_t input_dimension() const;
  std::size_t depth() const { return layers_.size(); }
  double operator()(std::span<const double> latent) const;
  bool is_linear() const { return layers_.size() == 1; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::vector<Layer> layers_;
};

// Offline deterministic reranker: latent = hash_embed(query) ⊙ hash_embed(content),
// scored by an affine head.
class HashReranker final : public Reranker {
 public:
  static constexpr std::uint64_t kDefaultSeed = 20240917;

  explicit HashReranker(std::size_t d = HashEmbedder::kDefaultDimension, std::uint64_t seed = kDefaultSeed);
  HashReranker(std::size_t d, AffineHead head);

  std::size_t latent_dimension() const override { return d_; }
  Vector extract_latent(std::string_view query, std::string_view content) const override;
  Eigen::MatrixXd extract_latents(std::string_view query, std::span<const std::string_view> contents) const override;
  double head_score(std::span<const double> latent) const override { return head_(latent); }

  const AffineHead& head() const { return head_; }

 private:
  std::size_t d_;
  AffineHead head_;
};

// Latents for every entry of `ret`, looked up in `g` for content. Plugin failures
// are rethrown as ModelError naming the node.
LatentBatch extract_latents(std::string_view query, const RankedList& ret, const CorpusGraph& g, const Reranker& rr);

// Head score per row.
std::vector<double> score_latents(const Eigen::MatrixXd& latents, const Reranker& rr);

// Plain model-based search: top-k of `ret` by reranker score. k is clamped to |ret|.
RankedList rerank_plain(std::string_view query, const RankedList& ret, const CorpusGraph& g, const Reranker& rr,
                        std::size_t k);

}  // namespace graphret
