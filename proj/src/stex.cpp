#include "graphret/stex.hpp"

#include <algorithm>
#include <limits>

#include "graphret/error.hpp"

namespace graphret {

std::vector<StexScore> stex_scores(std::span<const double> query, const EmbeddingIndex& index, const CorpusGraph& g,
                                   const RankedList& ret, double beta, View view) {
  if (ret.empty()) throw ValidationError("stex needs a non-empty retrieved list");
  if (!(beta >= 0.0)) throw ValidationError("beta must be non-negative");
  if (query.size() != index.dimension())
    throw DimensionError("query vector has length " + std::to_string(query.size()) + ", index dimension is " +
                         std::to_string(index.dimension()));

  // rank_by_id[id] = 1-based rank, 0 when not retrieved.
  std::vector<std::pair<CorpusGraph::Id, std::size_t>> ranked_ids;
  ranked_ids.reserve(ret.size());
  for (std::size_t r = 0; r < ret.size(); ++r) ranked_ids.emplace_back(g.id_of(ret[r].key), r + 1);
  std::sort(ranked_ids.begin(), ranked_ids.end());
  auto rank_of = [&](CorpusGraph::Id id) -> std::size_t {
    auto it = std::lower_bound(ranked_ids.begin(), ranked_ids.end(), std::make_pair(id, std::size_t{0}));
    return (it != ranked_ids.end() && it->first == id) ? it->second : 0;
  };

  // Retrieved neighbors of a candidate are read against the reversed view.
  const View back = view == View::Out ? View::In : view == View::In ? View::Out : View::Undirected;
  const double r_max = static_cast<double>(ret.size());

  std::vector<StexScore> out;
  for (CorpusGraph::Id n : frontier_ids(g, ret, view)) {
    StexScore s;
    s.key = g.key(n);
    std::size_t adjacent = 0;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (CorpusGraph::Id v : g.neighbor_ids(n, back)) {
      if (auto r = rank_of(v); r != 0) {
        ++adjacent;
        best = std::min(best, r);
      }
    }
    if (ret.size() > 1) s.rank_term = 1.0 - (static_cast<double>(best) - 1.0) / (r_max - 1.0);
    const double c_max = std::min(static_cast<double>(g.degree(n, back)), r_max);
    if (c_max > 1.0) s.bridging_term = (static_cast<double>(adjacent) - 1.0) / (c_max - 1.0);
    s.i_struct = s.rank_term + s.bridging_term;
    auto row = index.find(s.key);
    if (!row) throw LookupError("frontier node missing from embedding index: " + s.key);
    s.i_sim = dot(query, index.row(*row));
    s.total = s.i_sim + beta * s.i_struct;
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const StexScore& a, const StexScore& b) {
    return a.total != b.total ? a.total > b.total : a.key < b.key;
  });
  return out;
}

RankedList stex(std::span<const double> query, const EmbeddingIndex& index, const CorpusGraph& g,
                const RankedList& ret, double beta, View view) {
  std::vector<ScoredNode> entries;
  for (auto& s : stex_scores(query, index, g, ret, beta, view)) entries.push_back({std::move(s.key), s.total});
  return RankedList(std::move(entries));
}

}  // namespace graphret
