#pragma once

// Small graph builders and seeded random instances shared by the test suites.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "graphret/graph.hpp"
#include "graphret/ranked_list.hpp"

namespace fixtures {

using graphret::CorpusGraph;
using graphret::NodeKey;
using graphret::NodeRecord;
using graphret::RankedList;
using graphret::ScoredNode;

using EdgeList = std::vector<std::pair<NodeKey, NodeKey>>;

inline CorpusGraph graph(const std::vector<NodeKey>& keys, const EdgeList& edges) {
  std::vector<NodeRecord> nodes;
  for (const auto& k : keys) nodes.push_back({k, "text of " + k});
  return CorpusGraph::build(std::move(nodes), edges);
}

inline CorpusGraph graph_with_content(const std::vector<NodeRecord>& nodes, const EdgeList& edges) {
  return CorpusGraph::build(nodes, edges);
}

// Ranked list with descending placeholder scores, preserving the given order.
inline RankedList ranked(const std::vector<NodeKey>& keys) {
  std::vector<ScoredNode> entries;
  double s = static_cast<double>(keys.size());
  for (const auto& k : keys) entries.push_back({k, s--});
  return RankedList(std::move(entries));
}

inline std::string node_name(std::size_t i) {
  std::string s = "n";
  if (i < 10) s += "0";
  return s + std::to_string(i);
}

struct RandomGraph {
  std::vector<NodeKey> keys;
  EdgeList edges;
  CorpusGraph g;
};

// Erdos-Renyi style directed graph on n nodes with edge probability p.
inline RandomGraph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
  RandomGraph out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) out.keys.push_back(node_name(i));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && u(rng) < p) out.edges.emplace_back(out.keys[i], out.keys[j]);
  out.g = graph(out.keys, out.edges);
  return out;
}

// Random subset of keys (each kept with probability p), in shuffled order.
inline std::vector<NodeKey> random_subset(std::mt19937_64& rng, const std::vector<NodeKey>& keys, double p) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<NodeKey> out;
  for (const auto& k : keys)
    if (u(rng) < p) out.push_back(k);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// Random text over a small topic-word vocabulary.
inline std::string random_text(std::mt19937_64& rng, std::size_t words, std::size_t vocab = 40) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) s += (i ? " w" : "w") + std::to_string(rng() % vocab);
  return s;
}

}  // namespace fixtures
