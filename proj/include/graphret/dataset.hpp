#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graphret/graph.hpp"
#include "graphret/metrics.hpp"

namespace graphret {

struct Query {
  std::string id;
  std::string text;

  bool operator==(const Query&) const = default;
};

// JSON lines {"id": ..., "text": ...}; returned sorted by id. Duplicate ids are rejected.
std::vector<Query> parse_queries(std::string_view text);
std::string format_queries(const std::vector<Query>& queries);
std::string format_qrels(const Qrels& qrels);

struct Dataset {
  CorpusGraph graph;
  std::vector<Query> queries;
  Qrels qrels;
  LoadStats load_stats;
};

// Loads and cross-validates the four files. Queries without qrels are rejected,
// as are qrels for unknown queries.
Dataset load_dataset(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                     const std::filesystem::path& queries, const std::filesystem::path& qrels);

struct BridgeSpec {
  std::size_t n_clusters = 60;
  std::size_t cluster_size = 30;  // background nodes per cluster
  std::size_t bridges = 2;
  std::size_t gold = 5;
  std::size_t decoys = 24;
  std::uint64_t seed = 7;
};

struct SyntheticDataset {
  std::vector<NodeRecord> nodes;
  std::vector<std::pair<NodeKey, NodeKey>> edges;
  std::vector<Query> queries;
  Qrels qrels;

  CorpusGraph graph() const { return CorpusGraph::build(nodes, edges); }
};

// One query per cluster. The query repeats its cluster's topic words. Per cluster:
//   bridges  nearly the query text; linked to every gold node and to background nodes
//   gold     a few topic words diluted by filler; linked only to the bridges
//   decoys   topic-word overlap slightly above gold, hanging off background nodes
//   background filler-only nodes on a ring with random chords; consecutive clusters are joined
// Vector search ranks bridges then decoys above gold; every gold node is one hop from a bridge.
SyntheticDataset synth_bridge(const BridgeSpec& spec);

// Writes nodes.jsonl, edges.tsv, queries.jsonl and qrels.tsv into `dir` (created if needed).
void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir);

}  // namespace graphret
