#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graphret/embedding.hpp"
#include "graphret/graph.hpp"
#include "graphret/ranked_list.hpp"
#include "graphret/reranker.hpp"

namespace graphret {

struct FastInsightConfig {
  std::size_t batch = 10;
  double alpha = 0.2;
  double beta = 1.0;
  std::size_t budget = 100;
  std::size_t k_report = 10;
  View view = View::Undirected;

  // Throws ValidationError.
  void validate() const;
};

// Per-query bookkeeping. Durations are wall-clock milliseconds on a monotonic clock.
struct RetrievalTrace {
  std::vector<std::vector<NodeKey>> snapshots;  // retrieved keys after each GRanker pass
  RankedList initial_vs;                        // the seed vector search, before any reranking
  std::size_t vector_search_calls = 0;
  std::size_t granker_calls = 0;
  std::size_t stex_calls = 0;
  std::size_t rerank_calls = 0;
  std::size_t ppr_calls = 0;
  double embed_ms = 0.0;
  double vs_ms = 0.0;
  double granker_ms = 0.0;
  double stex_ms = 0.0;
  double rerank_ms = 0.0;
  double ppr_ms = 0.0;
  double total_ms = 0.0;
};

struct Retrieval {
  RankedList ranked;
  RetrievalTrace trace;
};

// Shared read-only state for answering queries. Many threads may query the same
// Retriever at once provided the embedder and reranker are concurrency-safe.
struct Retriever {
  const CorpusGraph& graph;
  const EmbeddingIndex& index;
  const Embedder& embedder;
  const Reranker& reranker;
};

// Seed with a BATCH-sized vector search, rerank with GRanker, then alternate STeX
// expansion (up to BATCH new nodes, never past the budget) and GRanker until the
// budget is reached or the frontier is exhausted.
Retrieval fastinsight_retrieve(std::string_view query, const Retriever& r, const FastInsightConfig& cfg);
// Same, with the query vector supplied by the caller.
Retrieval fastinsight_retrieve(std::string_view query, std::span<const double> query_vector, const Retriever& r,
                               const FastInsightConfig& cfg);

RankedList baseline_vs(std::string_view query, const Embedder& emb, const EmbeddingIndex& index, std::size_t k = 10);

// Vector search for `pool` candidates, then plain reranking down to k.
RankedList baseline_re2(std::string_view query, const Retriever& r, std::size_t pool = 100, std::size_t k = 10);

enum class Method { VectorSearch, Re2, FastInsight, PageRank };

Method parse_method(std::string_view name);
std::string_view to_string(Method m);

struct MethodParams {
  FastInsightConfig fastinsight;
  std::size_t re2_pool = 100;
  double ppr_restart = 0.15;
  double ppr_tol = 1e-8;
};

// Runs one method end to end, returning up to `fastinsight.budget` nodes:
//   VectorSearch  top-budget by dot product
//   Re2           top-re2_pool by dot product, reranked, cut to budget
//   FastInsight   fastinsight_retrieve
//   PageRank      top-batch vector-search seeds, then non-seed nodes by personalized PageRank
Retrieval retrieve(Method method, std::string_view query, const Retriever& r, const MethodParams& params);

}  // namespace graphret
