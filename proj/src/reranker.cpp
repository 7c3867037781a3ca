#include "graphret/reranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "graphret/error.hpp"
#include "graphret/io.hpp"

namespace graphret {

Eigen::MatrixXd Reranker::extract_latents(std::string_view query, std::span<const std::string_view> contents) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(contents.size()), static_cast<Eigen::Index>(latent_dimension()));
  for (std::size_t i = 0; i < contents.size(); ++i) {
    auto h = extract_latent(query, contents[i]);
    if (h.size() != latent_dimension())
      throw DimensionError("latent of length " + std::to_string(h.size()) + ", expected " +
                           std::to_string(latent_dimension()));
    out.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
  }
  return out;
}

AffineHead::AffineHead(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty() || layers_.size() > 2) throw ValidationError("scoring head must have one or two layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weights.rows() == 0 || l.weights.cols() == 0) throw ValidationError("scoring head layer is empty");
    if (l.bias.size() != l.weights.rows()) throw ValidationError("scoring head bias length does not match weights");
    if (i > 0 && l.weights.cols() != layers_[i - 1].weights.rows())
      throw ValidationError("scoring head layers do not chain");
  }
  if (layers_.back().weights.rows() != 1) throw ValidationError("scoring head must end in a single output");
}

namespace {

AffineHead::Layer layer_from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("weights") || !spec.contains("bias"))
    throw ValidationError("head layer needs \"weights\" and \"bias\"");
  const auto& w = spec["weights"];
  const auto& b = spec["bias"];
  if (!w.is_array() || w.empty() || !b.is_array()) throw ValidationError("head weights/bias must be arrays");
  const auto rows = static_cast<Eigen::Index>(w.size());
  const auto cols = static_cast<Eigen::Index>(w[0].size());
  AffineHead::Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(static_cast<Eigen::Index>(b.size()))};
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = w[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError("head weights must be a rectangular matrix");
    for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  for (std::size_t i = 0; i < b.size(); ++i) layer.bias(static_cast<Eigen::Index>(i)) = b[i].get<double>();
  return layer;
}

nlohmann::json layer_to_json(const AffineHead::Layer& layer) {
  nlohmann::json w = nlohmann::json::array();
  for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
    w.push_back(std::move(row));
  }
  nlohmann::json b = nlohmann::json::array();
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) b.push_back(layer.bias(i));
  return {{"weights", std::move(w)}, {"bias", std::move(b)}};
}

}  // namespace

AffineHead AffineHead::from_json(const nlohmann::json& spec) {
  std::vector<Layer> layers;
  if (spec.contains("layers")) {
    for (const auto& l : spec["layers"]) layers.push_back(layer_from_json(l));
  } else {
    layers.push_back(layer_from_json(spec));
  }
  return AffineHead(std::move(layers));
}

AffineHead AffineHead::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("head file " + path.string() + ": " + e.what(), 0);
  }
}

nlohmann::json AffineHead::to_json() const {
  if (layers_.size() == 1) return layer_to_json(layers_[0]);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : layers_) arr.push_back(layer_to_json(l));
  return {{"layers", std::move(arr)}};
}

AffineHead AffineHead::seeded_linear(std::size_t input_dim, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  Layer layer{Eigen::MatrixXd(1, static_cast<Eigen::Index>(input_dim)), Eigen::VectorXd::Zero(1)};
  for (std::size_t i = 0; i < input_dim; ++i) {
    // 53 high bits -> [0, 1); the standard distributions are not portable across libraries.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    layer.weights(0, static_cast<Eigen::Index>(i)) = 1.0 + spread * (2.0 * u - 1.0);
  }
  return AffineHead({std::move(layer)});
}

AffineHead AffineHead::sum(std::size_t input_dim) {
  Layer layer{Eigen::MatrixXd::Ones(1, static_cast<Eigen::Index>(input_dim)), Eigen::VectorXd::Zero(1)};
  return AffineHead({std::move(layer)});
}

std::size_t AffineHead::input_dimension() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.cols());
}

double AffineHead::operator()(std::span<const double> latent) const {
  if (latent.size() != input_dimension())
    throw DimensionError("head expects latent of length " + std::to_string(input_dimension()) + ", got " +
                         std::to_string(latent.size()));
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(latent.data(), static_cast<Eigen::Index>(latent.size()));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].weights * x + layers_[i].bias;
    if (i + 1 < layers_.size()) x = x.cwiseMax(0.0);
  }
  return x(0);
}

HashReranker::HashReranker(std::size_t d, std::uint64_t seed) : HashReranker(d, AffineHead::seeded_linear(d, seed)) {}

HashReranker::HashReranker(std::size_t d, AffineHead head) : d_(d), head_(std::move(head)) {
  if (d < 8) throw ValidationError("hash reranker dimension must be at least 8");
  if (head_.input_dimension() != d) throw DimensionError("hash reranker head input does not match latent dimension");
}

Vector HashReranker::extract_latent(std::string_view query, std::string_view content) const {
  auto q = hash_embed(query, d_);
  auto c = hash_embed(content, d_);
  for (std::size_t i = 0; i < d_; ++i) q[i] *= c[i];
  return q;
}

Eigen::MatrixXd HashReranker::extract_latents(std::string_view query, std::span<const std::string_view> contents) const {
  const auto q = hash_embed(query, d_);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(contents.size()), static_cast<Eigen::Index>(d_));
  for (std::size_t r = 0; r < contents.size(); ++r) {
    const auto c = hash_embed(contents[r], d_);
    for (std::size_t i = 0; i < d_; ++i) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = q[i] * c[i];
  }
  return out;
}

LatentBatch extract_latents(std::string_view query, const RankedList& ret, const CorpusGraph& g, const Reranker& rr) {
  LatentBatch batch;
  batch.keys = ret.keys();
  std::vector<std::string_view> contents;
  contents.reserve(ret.size());
  for (const auto& k : batch.keys) contents.emplace_back(g.node(g.id_of(k)).content);
  try {
    batch.values = rr.extract_latents(query, contents);
  } catch (const std::exception& first) {
    // Retry one node at a time to name the node that fails.
    for (std::size_t i = 0; i < contents.size(); ++i) {
      try {
        (void)rr.extract_latent(query, contents[i]);
      } catch (const std::exception& e) {
        throw ModelError("reranker failed on node " + batch.keys[i] + ": " + e.what());
      }
    }
    throw ModelError(std::string("reranker failed on batch of ") + std::to_string(contents.size()) +
                     " nodes starting at " + (batch.keys.empty() ? std::string("<none>") : batch.keys.front()) +
                     ": " + first.what());
  }
  if (batch.values.rows() != static_cast<Eigen::Index>(ret.size()) ||
      batch.values.cols() != static_cast<Eigen::Index>(rr.latent_dimension()))
    throw DimensionError("reranker returned a latent batch of the wrong shape");
  if (!batch.values.allFinite()) {
    for (Eigen::Index r = 0; r < batch.values.rows(); ++r)
      if (!batch.values.row(r).allFinite())
        throw ModelError("reranker produced non-finite latent for node " + batch.keys[static_cast<std::size_t>(r)]);
  }
  return batch;
}

std::vector<double> score_latents(const Eigen::MatrixXd& latents, const Reranker& rr) {
  std::vector<double> scores(static_cast<std::size_t>(latents.rows()));
  Eigen::VectorXd row(latents.cols());
  for (Eigen::Index r = 0; r < latents.rows(); ++r) {
    row = latents.row(r).transpose();
    scores[static_cast<std::size_t>(r)] = rr.head_score(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  return scores;
}

RankedList rerank_plain(std::string_view query, const RankedList& ret, const CorpusGraph& g, const Reranker& rr,
                        std::size_t k) {
  if (ret.empty()) throw ValidationError("rerank_plain needs a non-empty candidate list");
  const auto batch = extract_latents(query, ret, g, rr);
  const auto scores = score_latents(batch.values, rr);
  std::vector<ScoredNode> out;
  out.reserve(ret.size());
  for (std::size_t i = 0; i < ret.size(); ++i) out.push_back({batch.keys[i], scores[i]});
  std::sort(out.begin(), out.end(), ranks_before);
  out.resize(std::min(k, out.size()));
  return RankedList(std::move(out));
}

}  // namespace graphret
