#include "graphret/granker.hpp"

#include <algorithm>

#include "graphret/error.hpp"

namespace graphret {

bool PropagationMatrix::is_isolated(std::size_t row) const {
  return std::binary_search(isolated_rows.begin(), isolated_rows.end(), row);
}

PropagationMatrix build_propagation(const RankedList& ret, const CorpusGraph& g, View view) {
  const auto n = static_cast<Eigen::Index>(ret.size());
  std::vector<CorpusGraph::Id> ids;
  ids.reserve(ret.size());
  for (const auto& e : ret) ids.push_back(g.id_of(e.key));

  Eigen::VectorXd inv_degree(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto d = g.degree(ids[static_cast<std::size_t>(j)], view);
    inv_degree(j) = 1.0 / static_cast<double>(d == 0 ? 1 : d);
  }

  PropagationMatrix out;
  out.p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || !g.adjacent(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)], view)) continue;
      out.p(i, j) = inv_degree(j);
      row_sum += inv_degree(j);
    }
    if (row_sum == 0.0) {
      out.isolated_rows.push_back(static_cast<std::size_t>(i));
    } else {
      out.p.row(i) /= row_sum;
    }
  }
  return out;
}

LatentBatch fuse_latents(const LatentBatch& h, const PropagationMatrix& p, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  if (p.p.rows() != h.values.rows() || p.p.cols() != h.values.rows())
    throw DimensionError("propagation matrix is " + std::to_string(p.p.rows()) + "x" + std::to_string(p.p.cols()) +
                         " but the latent batch has " + std::to_string(h.values.rows()) + " rows");
  LatentBatch out;
  out.keys = h.keys;
  out.values = (1.0 - alpha) * h.values + alpha * (p.p * h.values);
  for (std::size_t r : p.isolated_rows) out.values.row(static_cast<Eigen::Index>(r)) = h.values.row(static_cast<Eigen::Index>(r));
  return out;
}

GRankerOutput granker_detailed(std::string_view query, const RankedList& ret, const CorpusGraph& g, double alpha,
                               const Reranker& rr, View view) {
  if (ret.empty()) throw ValidationError("granker needs a non-empty candidate list");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  const auto latents = extract_latents(query, ret, g, rr);
  const auto prop = build_propagation(ret, g, view);
  const auto fused = fuse_latents(latents, prop, alpha);

  GRankerOutput out;
  out.plain_scores = score_latents(latents.values, rr);
  out.fused_scores = score_latents(fused.values, rr);
  std::vector<ScoredNode> entries;
  entries.reserve(ret.size());
  for (std::size_t i = 0; i < ret.size(); ++i) entries.push_back({latents.keys[i], out.fused_scores[i]});
  out.ranked = RankedList::sorted(std::move(entries));
  return out;
}

RankedList granker(std::string_view query, const RankedList& ret, const CorpusGraph& g, double alpha,
                   const Reranker& rr, View view) {
  if (ret.empty()) throw ValidationError("granker needs a non-empty candidate list");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  const auto latents = extract_latents(query, ret, g, rr);
  const auto fused = fuse_latents(latents, build_propagation(ret, g, view), alpha);
  const auto scores = score_latents(fused.values, rr);
  std::vector<ScoredNode> entries;
  entries.reserve(ret.size());
  for (std::size_t i = 0; i < ret.size(); ++i) entries.push_back({latents.keys[i], scores[i]});
  return RankedList::sorted(std::move(entries));
}

}  // namespace graphret
