#pragma once

#include <span>
#include <vector>

#include "graphret/embedding.hpp"
#include "graphret/graph.hpp"
#include "graphret/ranked_list.hpp"

namespace graphret {

struct StexScore {
  NodeKey key;
  double rank_term = 0.0;      // in [0, 1]
  double bridging_term = 0.0;  // in [0, 1]
  double i_struct = 0.0;       // rank_term + bridging_term
  double i_sim = 0.0;
  double total = 0.0;          // i_sim + beta * i_struct
};

// Scores every frontier node of `ret`:
//   rank term     1 - (r_best - 1) / (|ret| - 1), r_best = best 1-based rank among retrieved neighbors
//   bridging term (|A(n)| - 1) / (min(deg(n), |ret|) - 1)
//   similarity    query . vector(n)
// Each structural term is 0 when its denominator would be 0. Output is sorted by
// (total desc, key asc); an empty frontier gives an empty result.
std::vector<StexScore> stex_scores(std::span<const double> query, const EmbeddingIndex& index, const CorpusGraph& g,
                                   const RankedList& ret, double beta, View view = View::Undirected);

RankedList stex(std::span<const double> query, const EmbeddingIndex& index, const CorpusGraph& g,
                const RankedList& ret, double beta, View view = View::Undirected);

}  // namespace graphret
