#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graphret/ranked_list.hpp"

namespace graphret {

// How directed edges are read when asking for neighbors or degrees.
enum class View : std::uint8_t {
  Out,         // (u, v) makes v a neighbor of u
  In,          // (u, v) makes u a neighbor of v
  Undirected,  // union of both
};

View parse_view(std::string_view name);
std::string_view to_string(View view);

struct NodeRecord {
  NodeKey key;
  std::string content;

  bool operator==(const NodeRecord&) const = default;
};

struct LoadStats {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges_dropped = 0;
};

// Immutable corpus graph. Nodes are stored in ascending key order, so node ids
// compare the same way keys do. All accessors are const and safe to call from
// many threads at once.
class CorpusGraph {
 public:
  using Id = std::uint32_t;

  CorpusGraph() = default;

  // Validates and indexes. Self-loops and duplicate edges are dropped and counted in `stats`.
  static CorpusGraph build(std::vector<NodeRecord> nodes,
                           const std::vector<std::pair<NodeKey, NodeKey>>& edges,
                           LoadStats* stats = nullptr);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  const std::vector<NodeRecord>& nodes() const noexcept { return nodes_; }
  const NodeRecord& node(Id id) const { return nodes_[id]; }
  const NodeKey& key(Id id) const { return nodes_[id].key; }

  // Directed edges sorted by (src, dst).
  const std::vector<std::pair<Id, Id>>& edges() const noexcept { return edges_; }

  std::optional<Id> find(std::string_view key) const;
  // Throws LookupError for unknown keys.
  Id id_of(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key).has_value(); }

  // Sorted, distinct neighbor ids.
  std::span<const Id> neighbor_ids(Id id, View view) const;
  std::size_t degree(Id id, View view) const { return neighbor_ids(id, view).size(); }
  std::size_t degree(std::string_view key, View view) const { return degree(id_of(key), view); }
  bool adjacent(Id from, Id to, View view) const;

  std::vector<NodeKey> neighbors(std::string_view key, View view) const;

  bool operator==(const CorpusGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  struct Csr {
    std::vector<std::size_t> offsets;
    std::vector<Id> targets;
    std::span<const Id> row(Id id) const {
      return {targets.data() + offsets[id], offsets[id + 1] - offsets[id]};
    }
  };

  std::vector<NodeRecord> nodes_;
  std::vector<std::pair<Id, Id>> edges_;
  Csr out_, in_, undirected_;
};

// Nodes: JSON lines {"key": ..., "content": ...}. Edges: "src\tdst" lines, no header.
CorpusGraph load_graph(std::istream& nodes_source, std::istream& edges_source, LoadStats* stats = nullptr);
CorpusGraph load_graph_text(std::string_view nodes_text, std::string_view edges_text, LoadStats* stats = nullptr);
// Files may be gzip-compressed.
CorpusGraph load_graph_files(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path,
                             LoadStats* stats = nullptr);

void write_nodes(std::ostream& out, const CorpusGraph& g);
void write_edges(std::ostream& out, const CorpusGraph& g);

// Neighbors of retrieved nodes that are not themselves retrieved, ascending by key.
std::vector<NodeKey> frontier(const CorpusGraph& g, const RankedList& ret, View view = View::Undirected);
std::vector<CorpusGraph::Id> frontier_ids(const CorpusGraph& g, const RankedList& ret, View view = View::Undirected);

}  // namespace graphret
