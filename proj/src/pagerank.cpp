#include "graphret/pagerank.hpp"

#include <algorithm>
#include <cmath>

#include "graphret/error.hpp"

namespace graphret {

PprResult ppr_scores(const CorpusGraph& g, const RankedList& seeds, const PprParams& params) {
  if (!(params.restart > 0.0 && params.restart < 1.0))
    throw ValidationError("restart probability must lie in (0, 1)");
  if (!(params.tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (seeds.empty()) throw ValidationError("personalized PageRank needs at least one seed");

  const std::size_t n = g.node_count();
  std::vector<double> restart_dist(n, 0.0);
  double total = 0.0;
  for (const auto& s : seeds) {
    if (!(s.score >= 0.0) || !std::isfinite(s.score))
      throw ValidationError("seed score must be finite and non-negative: " + s.key);
    restart_dist[g.id_of(s.key)] += s.score;
    total += s.score;
  }
  if (total <= 0.0) throw ValidationError("seed scores are all zero");
  for (double& v : restart_dist) v /= total;

  std::vector<double> inv_degree(n, 0.0);
  for (CorpusGraph::Id i = 0; i < n; ++i) {
    auto d = g.degree(i, params.view);
    if (d > 0) inv_degree[i] = 1.0 / static_cast<double>(d);
  }

  const double damping = 1.0 - params.restart;
  PprResult result;
  result.scores = restart_dist;
  std::vector<double> next(n);
  for (std::size_t it = 1; it <= params.max_iterations; ++it) {
    double dangling = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    for (CorpusGraph::Id i = 0; i < n; ++i) {
      const double h = result.scores[i];
      if (h == 0.0) continue;
      if (inv_degree[i] == 0.0) {
        dangling += h;
        continue;
      }
      const double share = damping * h * inv_degree[i];
      for (CorpusGraph::Id j : g.neighbor_ids(i, params.view)) next[j] += share;
    }
    const double back = damping * dangling + params.restart;
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] += back * restart_dist[j];
      change += std::abs(next[j] - result.scores[j]);
    }
    result.scores.swap(next);
    result.iterations = it;
    result.residual = change;
    if (change < params.tol) return result;
  }
  throw ConvergenceError("personalized PageRank did not converge within " + std::to_string(params.max_iterations) +
                             " iterations (residual " + std::to_string(result.residual) + ")",
                         result.residual);
}

RankedList personalized_pagerank(const CorpusGraph& g, const RankedList& seeds, double restart, double tol,
                                 std::size_t k, View view) {
  PprParams params;
  params.restart = restart;
  params.tol = tol;
  params.view = view;
  auto result = ppr_scores(g, seeds, params);

  std::vector<ScoredNode> pool;
  pool.reserve(g.node_count());
  for (CorpusGraph::Id i = 0; i < g.node_count(); ++i) {
    if (seeds.contains(g.key(i))) continue;
    pool.push_back({g.key(i), result.scores[i]});
  }
  const std::size_t take = std::min(k, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(), ranks_before);
  pool.resize(take);
  return RankedList(std::move(pool));
}

}  // namespace graphret
