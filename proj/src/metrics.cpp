#include "graphret/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>

#include "graphret/error.hpp"
#include "graphret/io.hpp"

namespace graphret {

Qrels parse_qrels(std::string_view text) {
  Qrels qrels;
  io::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos)
      throw ParseError("qrels: expected three tab-separated columns", line_no);
    auto qid = line.substr(0, t1);
    auto key = line.substr(t1 + 1, t2 - t1 - 1);
    auto rel_text = line.substr(t2 + 1);
    if (qid.empty() || key.empty()) throw ParseError("qrels: empty query id or node key", line_no);
    double rel = 0.0;
    auto [ptr, ec] = std::from_chars(rel_text.data(), rel_text.data() + rel_text.size(), rel);
    if (ec != std::errc() || ptr != rel_text.data() + rel_text.size())
      throw ParseError("qrels: relevance is not a number: " + std::string(rel_text), line_no);
    if (rel > 0.0) qrels[std::string(qid)].insert(std::string(key));
  });
  return qrels;
}

void validate_qrels(const Qrels& qrels, const CorpusGraph& g) {
  for (const auto& [qid, gold] : qrels) {
    if (gold.empty()) throw ValidationError("query " + qid + " has no gold nodes");
    for (const auto& k : gold)
      if (!g.contains(k)) throw ValidationError("query " + qid + " lists unknown gold node " + k);
  }
}

namespace {

void require_oracle(const KeySet& oracle) {
  if (oracle.empty()) throw ValidationError("oracle set is empty");
}

void require_k(std::size_t k) {
  if (k == 0) throw ValidationError("cutoff k must be at least 1");
}

std::size_t hits_in_top(const RankedList& ret, const KeySet& oracle, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ret.size()); ++i) hits += oracle.count(ret[i].key);
  return hits;
}

}  // namespace

double capped_recall_at_k(const RankedList& ret, const KeySet& oracle, std::size_t k) {
  require_oracle(oracle);
  require_k(k);
  return static_cast<double>(hits_in_top(ret, oracle, k)) / static_cast<double>(std::min(k, oracle.size()));
}

double recall_uncapped(const RankedList& ret, const KeySet& oracle) {
  require_oracle(oracle);
  return static_cast<double>(hits_in_top(ret, oracle, ret.size())) / static_cast<double>(oracle.size());
}

double ndcg_at_k(const RankedList& ret, const KeySet& oracle, std::size_t k) {
  require_oracle(oracle);
  require_k(k);
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ret.size()); ++i)
    if (oracle.count(ret[i].key)) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(k, oracle.size()); ++i) ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / ideal;
}

PathRule parse_path_rule(std::string_view name) {
  if (name == "min-cost") return PathRule::MinCost;
  if (name == "hop-shortest") return PathRule::HopShortest;
  throw ValidationError("unknown path rule: " + std::string(name));
}

namespace {

using Id = CorpusGraph::Id;

double node_cost(const CorpusGraph& g, Id id, View view) {
  return std::log1p(static_cast<double>(g.degree(id, view)));
}

std::vector<Id> resolve(const CorpusGraph& g, const KeySet& keys) {
  std::vector<Id> ids;
  ids.reserve(keys.size());
  for (const auto& k : keys) ids.push_back(g.id_of(k));
  return ids;
}

// Multi-source Dijkstra where leaving node v costs ln(1 + deg(v)).
std::vector<double> min_cost_field(const CorpusGraph& g, const std::vector<Id>& seeds, const std::vector<Id>& targets,
                                   View view) {
  const std::size_t n = g.node_count();
  std::vector<double> dist(n, kUnreachable);
  std::vector<char> settled(n, 0), wanted(n, 0);
  std::size_t remaining = 0;
  for (Id t : targets)
    if (!wanted[t]) wanted[t] = 1, ++remaining;

  using Item = std::pair<double, Id>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (Id s : seeds) {
    dist[s] = 0.0;
    heap.emplace(0.0, s);
  }
  while (!heap.empty() && remaining > 0) {
    auto [d, v] = heap.top();
    heap.pop();
    if (settled[v]) continue;
    settled[v] = 1;
    if (wanted[v]) --remaining;
    const double next = d + node_cost(g, v, view);
    for (Id w : g.neighbor_ids(v, view)) {
      if (!settled[w] && next < dist[w]) {
        dist[w] = next;
        heap.emplace(next, w);
      }
    }
  }
  return dist;
}

// Per seed, a breadth-first sweep keeping the cheapest cost among fewest-hop paths;
// then the minimum over seeds.
std::vector<double> hop_shortest_field(const CorpusGraph& g, const std::vector<Id>& seeds, View view) {
  const std::size_t n = g.node_count();
  std::vector<double> best(n, kUnreachable);
  std::vector<double> cost(n);
  std::vector<std::size_t> hops(n);
  constexpr std::size_t kUnseen = static_cast<std::size_t>(-1);
  for (Id s : seeds) {
    std::fill(hops.begin(), hops.end(), kUnseen);
    std::fill(cost.begin(), cost.end(), kUnreachable);
    std::vector<Id> layer{s};
    hops[s] = 0;
    cost[s] = 0.0;
    for (std::size_t h = 0; !layer.empty(); ++h) {
      std::vector<Id> next_layer;
      for (Id v : layer) {
        const double c = cost[v] + node_cost(g, v, view);
        for (Id w : g.neighbor_ids(v, view)) {
          if (hops[w] == kUnseen) {
            hops[w] = h + 1;
            next_layer.push_back(w);
          }
          if (hops[w] == h + 1 && c < cost[w]) cost[w] = c;
        }
      }
      layer = std::move(next_layer);
    }
    for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], cost[i]);
  }
  return best;
}

}  // namespace

std::vector<double> uncertainties(const CorpusGraph& g, const KeySet& retrieved, const std::vector<NodeKey>& targets,
                                  const TopologyOptions& opts) {
  std::vector<Id> target_ids;
  target_ids.reserve(targets.size());
  for (const auto& t : targets) target_ids.push_back(g.id_of(t));
  const auto seeds = resolve(g, retrieved);
  std::vector<double> out(targets.size(), kUnreachable);
  if (seeds.empty() || targets.empty()) return out;
  const auto field = opts.rule == PathRule::MinCost ? min_cost_field(g, seeds, target_ids, opts.view)
                                                    : hop_shortest_field(g, seeds, opts.view);
  for (std::size_t i = 0; i < targets.size(); ++i) out[i] = field[target_ids[i]];
  return out;
}

double uncertainty(const CorpusGraph& g, const KeySet& retrieved, const NodeKey& target, const TopologyOptions& opts) {
  g.id_of(target);
  if (retrieved.count(target)) return 0.0;
  return uncertainties(g, retrieved, {target}, opts).front();
}

namespace {

KeySet key_set(const RankedList& ret) {
  KeySet s;
  for (const auto& e : ret) s.insert(e.key);
  return s;
}

double tr_over(const CorpusGraph& g, const KeySet& retrieved, const KeySet& oracle, const TopologyOptions& opts) {
  std::vector<NodeKey> targets(oracle.begin(), oracle.end());
  const auto u = uncertainties(g, retrieved, targets, opts);
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (retrieved.count(targets[i])) sum += 1.0;
    else if (std::isfinite(u[i])) sum += 1.0 / (1.0 + u[i]);
  }
  return sum / static_cast<double>(oracle.size());
}

}  // namespace

double topological_recall(const CorpusGraph& g, const RankedList& ret, const KeySet& oracle,
                          const TopologyOptions& opts) {
  require_oracle(oracle);
  return tr_over(g, key_set(ret), oracle, opts);
}

double miss_tr(const CorpusGraph& g, const RankedList& ret, const KeySet& oracle, const TopologyOptions& opts) {
  require_oracle(oracle);
  const auto retrieved = key_set(ret);
  KeySet missing;
  for (const auto& k : oracle)
    if (!retrieved.count(k)) missing.insert(k);
  if (missing.empty()) return 0.0;
  return static_cast<double>(missing.size()) / static_cast<double>(oracle.size()) *
         tr_over(g, retrieved, missing, opts);
}

double marginal_recall_gain(const RankedList& final_list, const RankedList& initial_vs, const KeySet& oracle,
                            std::size_t k_total, std::size_t k_vs) {
  return capped_recall_at_k(final_list, oracle, k_total) - capped_recall_at_k(initial_vs, oracle, k_vs);
}

QueryMetrics evaluate_query(const CorpusGraph& g, const RankedList& ret, const RankedList& initial_vs,
                            const KeySet& oracle, const MetricOptions& opts) {
  QueryMetrics m;
  m.recall_at_k = capped_recall_at_k(ret, oracle, opts.k);
  m.ndcg_at_k = ndcg_at_k(ret, oracle, opts.k);
  m.recall_uncapped = recall_uncapped(ret, oracle);
  m.tr = topological_recall(g, ret, oracle, opts.topology);
  m.miss_tr = miss_tr(g, ret, oracle, opts.topology);
  m.recall_total = capped_recall_at_k(ret, oracle, opts.k_total);
  m.recall_vs = capped_recall_at_k(initial_vs, oracle, opts.k_vs);
  m.delta_r = m.recall_total - m.recall_vs;
  return m;
}

}  // namespace graphret
