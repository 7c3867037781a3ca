#pragma once

#include <chrono>
#include <cstddef>
#include <string>

#include "graphret/embedding.hpp"
#include "graphret/reranker.hpp"

namespace graphret {

// "http://host[:port]/path" split for the HTTP client.
struct Endpoint {
  std::string origin;  // scheme://host:port
  std::string path;

  static Endpoint parse(const std::string& url);
};

// POST {"texts": [...]} -> {"vectors": [[...], ...]}
class RemoteEmbedder final : public Embedder {
 public:
  // dimension 0 asks the server once and remembers the answer.
  RemoteEmbedder(const std::string& url, std::size_t batch_size = 64, std::size_t dimension = 0,
                 std::chrono::seconds timeout = std::chrono::seconds(60));

  std::size_t dimension() const override { return d_; }
  Vector encode_query(std::string_view text) const override;
  Vector encode_node(std::string_view text) const override;
  std::vector<Vector> encode_nodes(std::span<const std::string_view> texts) const override;

 private:
  std::vector<Vector> post(std::span<const std::string_view> texts) const;

  Endpoint endpoint_;
  std::size_t batch_size_;
  std::size_t d_;
  std::chrono::seconds timeout_;
};

// POST {"query": q, "documents": [...], "return_latents": true} -> {"latents": [[...], ...]},
// scored locally by an AffineHead.
class RemoteReranker final : public Reranker {
 public:
  RemoteReranker(const std::string& url, AffineHead head, std::size_t batch_size = 128,
                 std::chrono::seconds timeout = std::chrono::seconds(60));

  std::size_t latent_dimension() const override { return head_.input_dimension(); }
  Vector extract_latent(std::string_view query, std::string_view content) const override;
  Eigen::MatrixXd extract_latents(std::string_view query, std::span<const std::string_view> contents) const override;
  double head_score(std::span<const double> latent) const override { return head_(latent); }

 private:
  Endpoint endpoint_;
  AffineHead head_;
  std::size_t batch_size_;
  std::chrono::seconds timeout_;
};

}  // namespace graphret
