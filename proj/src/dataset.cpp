#include "graphret/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include <json.hpp>

#include "graphret/error.hpp"
#include "graphret/io.hpp"

namespace graphret {

std::vector<Query> parse_queries(std::string_view text) {
  std::vector<Query> out;
  io::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("queries: invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() || !obj.contains("text") ||
        !obj["text"].is_string())
      throw ParseError("queries: expected string fields \"id\" and \"text\"", line_no);
    out.push_back({obj["id"].get<std::string>(), obj["text"].get<std::string>()});
    if (out.back().id.empty()) throw ParseError("queries: empty id", line_no);
  });
  std::sort(out.begin(), out.end(), [](const Query& a, const Query& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].id == out[i - 1].id) throw ValidationError("duplicate query id: " + out[i].id);
  return out;
}

std::string format_queries(const std::vector<Query>& queries) {
  std::string out;
  for (const auto& q : queries) out += nlohmann::json{{"id", q.id}, {"text", q.text}}.dump() + "\n";
  return out;
}

std::string format_qrels(const Qrels& qrels) {
  std::string out;
  for (const auto& [qid, gold] : qrels)
    for (const auto& k : gold) out += qid + "\t" + k + "\t1\n";
  return out;
}

Dataset load_dataset(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                     const std::filesystem::path& queries, const std::filesystem::path& qrels) {
  Dataset ds;
  ds.graph = load_graph_files(nodes, edges, &ds.load_stats);
  ds.queries = parse_queries(io::read_file(queries));
  ds.qrels = parse_qrels(io::read_file(qrels));
  validate_qrels(ds.qrels, ds.graph);
  for (const auto& q : ds.queries)
    if (!ds.qrels.count(q.id)) throw ValidationError("query " + q.id + " has no gold nodes in the qrels file");
  for (const auto& [qid, gold] : ds.qrels) {
    auto it = std::lower_bound(ds.queries.begin(), ds.queries.end(), qid,
                               [](const Query& q, const std::string& id) { return q.id < id; });
    if (it == ds.queries.end() || it->id != qid) throw ValidationError("qrels name unknown query " + qid);
  }
  return ds;
}

namespace {

constexpr std::size_t kTopicWords = 8;

std::string pad(std::size_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*zu", width, v);
  return buf;
}

// Portable uniform integer in [0, n).
std::size_t draw(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[draw(rng, i)]);
}

}  // namespace

SyntheticDataset synth_bridge(const BridgeSpec& spec) {
  if (spec.n_clusters < 2 || spec.cluster_size < 2)
    throw ValidationError("synth_bridge needs at least 2 clusters of at least 2 nodes");
  if (spec.bridges < 1 || spec.gold < 1) throw ValidationError("synth_bridge needs bridges and gold nodes");
  std::mt19937_64 rng(spec.seed);
  SyntheticDataset out;
  std::size_t filler_id = 0;

  auto topic = [](std::size_t c, std::size_t j) { return "topic" + pad(c, 3) + "w" + std::to_string(j); };
  auto text_with = [&](std::size_t c, std::size_t topic_count, std::size_t filler_count) {
    std::vector<std::string> words;
    std::vector<std::size_t> picks(kTopicWords);
    for (std::size_t j = 0; j < kTopicWords; ++j) picks[j] = j;
    shuffle(picks, rng);
    for (std::size_t j = 0; j < topic_count; ++j) words.push_back(topic(c, picks[j]));
    for (std::size_t j = 0; j < filler_count; ++j) words.push_back("filler" + std::to_string(filler_id++));
    shuffle(words, rng);
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    return text;
  };
  auto link = [&](const NodeKey& a, const NodeKey& b) { out.edges.emplace_back(a, b); };

  std::vector<std::vector<NodeKey>> background(spec.n_clusters);
  for (std::size_t c = 0; c < spec.n_clusters; ++c) {
    const std::string prefix = "c" + pad(c, 3) + "-";
    auto& bg = background[c];
    for (std::size_t i = 0; i < spec.cluster_size; ++i) {
      bg.push_back(prefix + "bg" + pad(i, 3));
      out.nodes.push_back({bg.back(), text_with(c, 0, 4 + draw(rng, 4))});
    }
    for (std::size_t i = 0; i < spec.cluster_size; ++i) link(bg[i], bg[(i + 1) % spec.cluster_size]);
    for (std::size_t i = 0; i < spec.cluster_size / 4; ++i) {
      auto a = draw(rng, spec.cluster_size), b = draw(rng, spec.cluster_size);
      if (a != b) link(bg[a], bg[b]);
    }

    std::vector<NodeKey> bridges, gold;
    for (std::size_t i = 0; i < spec.bridges; ++i) {
      bridges.push_back(prefix + "bridge" + pad(i, 2));
      out.nodes.push_back({bridges.back(), text_with(c, kTopicWords, 1)});
      link(bridges.back(), bg[draw(rng, spec.cluster_size)]);
      link(bridges.back(), bg[draw(rng, spec.cluster_size)]);
    }
    for (std::size_t i = 0; i < spec.gold; ++i) {
      gold.push_back(prefix + "gold" + pad(i, 2));
      out.nodes.push_back({gold.back(), text_with(c, 3, 5)});
      for (const auto& b : bridges) link(gold.back(), b);
    }
    for (std::size_t i = 0; i < spec.decoys; ++i) {
      const NodeKey key = prefix + "decoy" + pad(i, 3);
      out.nodes.push_back({key, text_with(c, 3, 3)});
      link(key, bg[draw(rng, spec.cluster_size)]);
    }

    std::string query;
    for (std::size_t j = 0; j < kTopicWords; ++j) query += (j ? " " : "") + topic(c, j);
    const std::string qid = "q" + pad(c, 3);
    out.queries.push_back({qid, query});
    out.qrels[qid] = KeySet(gold.begin(), gold.end());
  }
  for (std::size_t c = 0; c + 1 < spec.n_clusters; ++c)
    link(background[c][draw(rng, spec.cluster_size)], background[c + 1][draw(rng, spec.cluster_size)]);
  return out;
}

void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream nodes, edges;
  for (const auto& n : data.nodes) nodes << nlohmann::json{{"key", n.key}, {"content", n.content}}.dump() << '\n';
  for (const auto& [s, d] : data.edges) edges << s << '\t' << d << '\n';
  io::write_file(dir / "nodes.jsonl", nodes.str());
  io::write_file(dir / "edges.tsv", edges.str());
  io::write_file(dir / "queries.jsonl", format_queries(data.queries));
  io::write_file(dir / "qrels.tsv", format_qrels(data.qrels));
}

}  // namespace graphret
