#include "graphret/graph.hpp"

#include <algorithm>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>

#include <json.hpp>

#include "graphret/error.hpp"
#include "graphret/io.hpp"

namespace graphret {

View parse_view(std::string_view name) {
  if (name == "out") return View::Out;
  if (name == "in") return View::In;
  if (name == "undirected") return View::Undirected;
  throw ValidationError("unknown directedness view: " + std::string(name));
}

std::string_view to_string(View view) {
  switch (view) {
    case View::Out: return "out";
    case View::In: return "in";
    case View::Undirected: return "undirected";
  }
  return "undirected";
}

namespace {

using Id = CorpusGraph::Id;

template <typename Csr>
Csr make_csr(std::size_t n, const std::vector<std::pair<Id, Id>>& pairs) {
  Csr csr;
  csr.offsets.assign(n + 1, 0);
  for (const auto& [s, d] : pairs) ++csr.offsets[s + 1];
  for (std::size_t i = 0; i < n; ++i) csr.offsets[i + 1] += csr.offsets[i];
  csr.targets.resize(pairs.size());
  std::vector<std::size_t> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
  for (const auto& [s, d] : pairs) csr.targets[cursor[s]++] = d;
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(csr.targets.begin() + static_cast<std::ptrdiff_t>(csr.offsets[i]),
              csr.targets.begin() + static_cast<std::ptrdiff_t>(csr.offsets[i + 1]));
  }
  return csr;
}

}  // namespace

CorpusGraph CorpusGraph::build(std::vector<NodeRecord> nodes, const std::vector<std::pair<NodeKey, NodeKey>>& edges,
                               LoadStats* stats) {
  CorpusGraph g;
  std::sort(nodes.begin(), nodes.end(), [](const NodeRecord& a, const NodeRecord& b) { return a.key < b.key; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].key.empty()) throw ValidationError("node key must be non-empty");
    if (i > 0 && nodes[i].key == nodes[i - 1].key) throw ValidationError("duplicate node key: " + nodes[i].key);
  }
  g.nodes_ = std::move(nodes);

  LoadStats local;
  std::set<std::string> unknown;
  std::vector<std::pair<Id, Id>> directed;
  directed.reserve(edges.size());
  for (const auto& [src, dst] : edges) {
    auto s = g.find(src);
    auto d = g.find(dst);
    if (!s) unknown.insert(src);
    if (!d) unknown.insert(dst);
    if (!s || !d) continue;
    if (*s == *d) {
      ++local.self_loops_dropped;
      continue;
    }
    directed.emplace_back(*s, *d);
  }
  if (!unknown.empty()) {
    std::string msg = "edges reference unknown node keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ValidationError(msg);
  }
  std::sort(directed.begin(), directed.end());
  auto last = std::unique(directed.begin(), directed.end());
  local.duplicate_edges_dropped = static_cast<std::size_t>(std::distance(last, directed.end()));
  directed.erase(last, directed.end());
  g.edges_ = std::move(directed);

  const std::size_t n = g.nodes_.size();
  std::vector<std::pair<Id, Id>> reversed;
  reversed.reserve(g.edges_.size());
  for (const auto& [s, d] : g.edges_) reversed.emplace_back(d, s);
  g.out_ = make_csr<Csr>(n, g.edges_);
  g.in_ = make_csr<Csr>(n, reversed);

  std::vector<std::pair<Id, Id>> both = g.edges_;
  both.insert(both.end(), reversed.begin(), reversed.end());
  std::sort(both.begin(), both.end());
  both.erase(std::unique(both.begin(), both.end()), both.end());
  g.undirected_ = make_csr<Csr>(n, both);

  if (stats) *stats = local;
  return g;
}

std::optional<Id> CorpusGraph::find(std::string_view key) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key,
                             [](const NodeRecord& n, std::string_view k) { return n.key < k; });
  if (it == nodes_.end() || it->key != key) return std::nullopt;
  return static_cast<Id>(it - nodes_.begin());
}

Id CorpusGraph::id_of(std::string_view key) const {
  auto id = find(key);
  if (!id) throw LookupError("unknown node key: " + std::string(key));
  return *id;
}

std::span<const Id> CorpusGraph::neighbor_ids(Id id, View view) const {
  if (id >= nodes_.size()) throw LookupError("node id out of range: " + std::to_string(id));
  switch (view) {
    case View::Out: return out_.row(id);
    case View::In: return in_.row(id);
    case View::Undirected: return undirected_.row(id);
  }
  return undirected_.row(id);
}

bool CorpusGraph::adjacent(Id from, Id to, View view) const {
  auto row = neighbor_ids(from, view);
  return std::binary_search(row.begin(), row.end(), to);
}

std::vector<NodeKey> CorpusGraph::neighbors(std::string_view key, View view) const {
  std::vector<NodeKey> out;
  for (Id n : neighbor_ids(id_of(key), view)) out.push_back(nodes_[n].key);
  return out;
}

CorpusGraph load_graph_text(std::string_view nodes_text, std::string_view edges_text, LoadStats* stats) {
  std::vector<NodeRecord> nodes;
  io::for_each_line(nodes_text, [&](std::string_view line, std::size_t line_no) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("nodes: invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object() || !obj.contains("key") || !obj["key"].is_string())
      throw ParseError("nodes: missing string field \"key\"", line_no);
    if (obj.contains("content") && !obj["content"].is_string())
      throw ParseError("nodes: field \"content\" must be a string", line_no);
    NodeRecord rec{obj["key"].get<std::string>(), obj.value("content", std::string())};
    if (rec.key.empty()) throw ParseError("nodes: empty key", line_no);
    nodes.push_back(std::move(rec));
  });

  std::vector<std::pair<NodeKey, NodeKey>> edges;
  io::for_each_line(edges_text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos)
      throw ParseError("edges: expected two tab-separated columns", line_no);
    auto src = line.substr(0, tab);
    auto dst = line.substr(tab + 1);
    if (src.empty() || dst.empty()) throw ParseError("edges: empty node key", line_no);
    edges.emplace_back(std::string(src), std::string(dst));
  });

  return CorpusGraph::build(std::move(nodes), edges, stats);
}

CorpusGraph load_graph(std::istream& nodes_source, std::istream& edges_source, LoadStats* stats) {
  std::string nodes_text(std::istreambuf_iterator<char>(nodes_source), {});
  std::string edges_text(std::istreambuf_iterator<char>(edges_source), {});
  return load_graph_text(nodes_text, edges_text, stats);
}

CorpusGraph load_graph_files(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path,
                             LoadStats* stats) {
  return load_graph_text(io::read_file(nodes_path), io::read_file(edges_path), stats);
}

void write_nodes(std::ostream& out, const CorpusGraph& g) {
  for (const auto& n : g.nodes()) {
    nlohmann::json obj{{"key", n.key}, {"content", n.content}};
    out << obj.dump() << '\n';
  }
}

void write_edges(std::ostream& out, const CorpusGraph& g) {
  for (const auto& [s, d] : g.edges()) out << g.key(s) << '\t' << g.key(d) << '\n';
}

std::vector<Id> frontier_ids(const CorpusGraph& g, const RankedList& ret, View view) {
  std::vector<Id> retrieved;
  retrieved.reserve(ret.size());
  for (const auto& e : ret) retrieved.push_back(g.id_of(e.key));
  std::sort(retrieved.begin(), retrieved.end());

  std::vector<Id> out;
  for (Id s : retrieved) {
    auto row = g.neighbor_ids(s, view);
    out.insert(out.end(), row.begin(), row.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::erase_if(out, [&](Id n) { return std::binary_search(retrieved.begin(), retrieved.end(), n); });
  return out;
}

std::vector<NodeKey> frontier(const CorpusGraph& g, const RankedList& ret, View view) {
  std::vector<NodeKey> out;
  for (Id id : frontier_ids(g, ret, view)) out.push_back(g.key(id));
  return out;
}

}  // namespace graphret
