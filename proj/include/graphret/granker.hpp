#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "graphret/graph.hpp"
#include "graphret/ranked_list.hpp"
#include "graphret/reranker.hpp"

namespace graphret {

// Row-stochastic propagation over the subgraph induced by a ranked list.
// Rows listed in `isolated_rows` have no neighbor inside the list and are all zero.
struct PropagationMatrix {
  Eigen::MatrixXd p;
  std::vector<std::size_t> isolated_rows;

  bool is_isolated(std::size_t row) const;
};

// A_ij = 1 when ret[i] and ret[j] are adjacent under `view`; D_ii = full-graph degree
// of ret[i] (0 replaced by 1); W = A D^-1; P = diag(W 1)^-1 W.
PropagationMatrix build_propagation(const RankedList& ret, const CorpusGraph& g, View view = View::Undirected);

// H' = (1 - alpha) H + alpha P H on connected rows; isolated rows keep H.
LatentBatch fuse_latents(const LatentBatch& h, const PropagationMatrix& p, double alpha);

struct GRankerOutput {
  RankedList ranked;
  std::vector<double> plain_scores;  // head(H) in input order
  std::vector<double> fused_scores;  // head(H') in input order
};

// Extract latents for `ret`, smooth them over the induced subgraph, score with the
// reranker head and reorder. Always a permutation of `ret`.
GRankerOutput granker_detailed(std::string_view query, const RankedList& ret, const CorpusGraph& g, double alpha,
                               const Reranker& rr, View view = View::Undirected);

RankedList granker(std::string_view query, const RankedList& ret, const CorpusGraph& g, double alpha,
                   const Reranker& rr, View view = View::Undirected);

}  // namespace graphret
