#pragma once

#include <cstddef>
#include <vector>

#include "graphret/graph.hpp"
#include "graphret/ranked_list.hpp"

namespace graphret {

struct PprParams {
  double restart = 0.15;
  double tol = 1e-8;  // on the L1 change between iterates
  std::size_t max_iterations = 1000;
  View view = View::Undirected;
};

struct PprResult {
  std::vector<double> scores;  // indexed by node id
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Personalized PageRank by power iteration:
//   h <- (1 - restart) * M h + restart * h0
// with M the column-normalized transition matrix and h0 the seed scores normalized
// to sum 1. Mass on nodes without neighbors is returned to h0. Throws
// ConvergenceError past max_iterations.
PprResult ppr_scores(const CorpusGraph& g, const RankedList& seeds, const PprParams& params = {});

// Top-k non-seed nodes by converged score.
RankedList personalized_pagerank(const CorpusGraph& g, const RankedList& seeds, double restart, double tol,
                                 std::size_t k, View view = View::Undirected);

}  // namespace graphret
