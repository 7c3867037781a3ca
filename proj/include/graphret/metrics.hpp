#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "graphret/graph.hpp"
#include "graphret/ranked_list.hpp"

namespace graphret {

using KeySet = std::set<NodeKey>;

// query id -> gold node keys
using Qrels = std::map<std::string, KeySet>;

// "query\tnode\trelevance" lines, no header; relevance > 0 marks gold.
Qrels parse_qrels(std::string_view text);
// Every gold key must exist in g and every gold set must be non-empty.
void validate_qrels(const Qrels& qrels, const CorpusGraph& g);

// |top-k ∩ oracle| / min(k, |oracle|)
double capped_recall_at_k(const RankedList& ret, const KeySet& oracle, std::size_t k);
// |ret ∩ oracle| / |oracle| over the whole list
double recall_uncapped(const RankedList& ret, const KeySet& oracle);
// Binary gains, 1/log2(rank + 1) discount, ideal DCG over min(k, |oracle|) hits.
double ndcg_at_k(const RankedList& ret, const KeySet& oracle, std::size_t k);

// Which path the uncertainty accumulates over.
enum class PathRule : std::uint8_t {
  MinCost,      // the path minimizing the accumulated log-degree
  HopShortest,  // fewest hops; ties broken by lower accumulated log-degree
};

PathRule parse_path_rule(std::string_view name);

struct TopologyOptions {
  View view = View::Undirected;
  PathRule rule = PathRule::MinCost;
};

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Minimum over retrieved seeds of sum ln(1 + deg(n_k)) over path nodes other than the
// target; the seed's own term counts. 0 for retrieved targets, infinity when unreachable.
double uncertainty(const CorpusGraph& g, const KeySet& retrieved, const NodeKey& target,
                   const TopologyOptions& opts = {});

// Uncertainty of every target in one search. Targets must exist in g.
std::vector<double> uncertainties(const CorpusGraph& g, const KeySet& retrieved, const std::vector<NodeKey>& targets,
                                  const TopologyOptions& opts = {});

// Mean over oracle nodes of 1 / (1 + u).
double topological_recall(const CorpusGraph& g, const RankedList& ret, const KeySet& oracle,
                          const TopologyOptions& opts = {});
// (|oracle \ ret| / |oracle|) * TR over oracle \ ret; 0 when everything was found.
double miss_tr(const CorpusGraph& g, const RankedList& ret, const KeySet& oracle, const TopologyOptions& opts = {});

// Capped recall of `final_list` at k_total minus capped recall of `initial_vs` at k_vs.
double marginal_recall_gain(const RankedList& final_list, const RankedList& initial_vs, const KeySet& oracle,
                            std::size_t k_total, std::size_t k_vs);

struct MetricOptions {
  std::size_t k = 10;         // cutoff for recall@k and nDCG@k
  std::size_t k_total = 100;  // cutoff for the final-list recall in the marginal gain
  std::size_t k_vs = 10;      // cutoff for the initial vector-search recall
  TopologyOptions topology;
};

struct QueryMetrics {
  double recall_at_k = 0.0;
  double ndcg_at_k = 0.0;
  double recall_uncapped = 0.0;
  double tr = 0.0;
  double miss_tr = 0.0;
  double recall_total = 0.0;  // capped recall of the final list at k_total
  double recall_vs = 0.0;     // capped recall of the initial vector search at k_vs
  double delta_r = 0.0;       // recall_total - recall_vs
};

QueryMetrics evaluate_query(const CorpusGraph& g, const RankedList& ret, const RankedList& initial_vs,
                            const KeySet& oracle, const MetricOptions& opts = {});

}  // namespace graphret
