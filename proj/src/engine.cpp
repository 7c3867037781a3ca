#include "graphret/engine.hpp"

#include <algorithm>
#include <chrono>

#include "graphret/error.hpp"
#include "graphret/granker.hpp"
#include "graphret/pagerank.hpp"
#include "graphret/stex.hpp"

namespace graphret {

void FastInsightConfig::validate() const {
  if (batch < 1) throw ValidationError("batch must be at least 1");
  if (budget < batch) throw ValidationError("budget must be at least batch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  if (!(beta >= 0.0)) throw ValidationError("beta must be non-negative");
  if (k_report < 1) throw ValidationError("k_report must be at least 1");
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Adds the lifetime of the scope to `sink`.
class Stopwatch {
 public:
  explicit Stopwatch(double& sink) : sink_(sink), start_(Clock::now()) {}
  ~Stopwatch() { sink_ += ms_since(start_); }
  Stopwatch(const Stopwatch&) = delete;
  Stopwatch& operator=(const Stopwatch&) = delete;

 private:
  double& sink_;
  Clock::time_point start_;
};

Vector embed_query(std::string_view query, const Retriever& r, RetrievalTrace& trace) {
  Stopwatch sw(trace.embed_ms);
  return prepare_query(r.embedder.encode_query(query), r.index);
}

}  // namespace

Retrieval fastinsight_retrieve(std::string_view query, std::span<const double> qv, const Retriever& r,
                               const FastInsightConfig& cfg) {
  cfg.validate();
  if (r.graph.empty()) throw ValidationError("cannot retrieve from an empty graph");
  Retrieval out;
  auto& trace = out.trace;
  const auto start = Clock::now();

  RankedList ret;
  {
    Stopwatch sw(trace.vs_ms);
    ret = vector_search(qv, r.index, cfg.batch);
    ++trace.vector_search_calls;
  }
  trace.initial_vs = ret;
  {
    Stopwatch sw(trace.granker_ms);
    ret = granker(query, ret, r.graph, cfg.alpha, r.reranker, cfg.view);
    ++trace.granker_calls;
  }
  trace.snapshots.push_back(ret.keys());

  while (ret.size() < cfg.budget) {
    RankedList added;
    {
      Stopwatch sw(trace.stex_ms);
      added = stex(qv, r.index, r.graph, ret, cfg.beta, cfg.view);
      ++trace.stex_calls;
    }
    if (added.empty()) break;
    const std::size_t remain = std::min(ret.size() + cfg.batch, cfg.budget) - ret.size();
    std::vector<ScoredNode> grown = ret.entries();
    for (std::size_t i = 0; i < std::min(remain, added.size()); ++i) grown.push_back(added[i]);
    {
      Stopwatch sw(trace.granker_ms);
      ret = granker(query, RankedList(std::move(grown)), r.graph, cfg.alpha, r.reranker, cfg.view);
      ++trace.granker_calls;
    }
    trace.snapshots.push_back(ret.keys());
  }
  out.ranked = std::move(ret);
  trace.total_ms = ms_since(start);
  return out;
}

Retrieval fastinsight_retrieve(std::string_view query, const Retriever& r, const FastInsightConfig& cfg) {
  RetrievalTrace pre;
  const auto qv = embed_query(query, r, pre);
  auto out = fastinsight_retrieve(query, qv, r, cfg);
  out.trace.embed_ms = pre.embed_ms;
  out.trace.total_ms += pre.embed_ms;
  return out;
}

RankedList baseline_vs(std::string_view query, const Embedder& emb, const EmbeddingIndex& index, std::size_t k) {
  return vector_search(prepare_query(emb.encode_query(query), index), index, k);
}

RankedList baseline_re2(std::string_view query, const Retriever& r, std::size_t pool, std::size_t k) {
  if (pool < k) throw ValidationError("re2 pool must be at least k");
  auto candidates = baseline_vs(query, r.embedder, r.index, pool);
  return rerank_plain(query, candidates, r.graph, r.reranker, k);
}

Method parse_method(std::string_view name) {
  if (name == "vs") return Method::VectorSearch;
  if (name == "re2") return Method::Re2;
  if (name == "fastinsight") return Method::FastInsight;
  if (name == "ppr") return Method::PageRank;
  throw ValidationError("unknown method: " + std::string(name));
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::VectorSearch: return "vs";
    case Method::Re2: return "re2";
    case Method::FastInsight: return "fastinsight";
    case Method::PageRank: return "ppr";
  }
  return "vs";
}

Retrieval retrieve(Method method, std::string_view query, const Retriever& r, const MethodParams& params) {
  const auto& cfg = params.fastinsight;
  cfg.validate();
  if (method == Method::FastInsight) return fastinsight_retrieve(query, r, cfg);

  Retrieval out;
  auto& trace = out.trace;
  const auto start = Clock::now();
  const auto qv = embed_query(query, r, trace);

  switch (method) {
    case Method::VectorSearch: {
      Stopwatch sw(trace.vs_ms);
      out.ranked = vector_search(qv, r.index, cfg.budget);
      ++trace.vector_search_calls;
      trace.initial_vs = out.ranked.head(cfg.batch);
      break;
    }
    case Method::Re2: {
      if (params.re2_pool < 1) throw ValidationError("re2 pool must be at least 1");
      RankedList pool;
      {
        Stopwatch sw(trace.vs_ms);
        pool = vector_search(qv, r.index, params.re2_pool);
        ++trace.vector_search_calls;
      }
      trace.initial_vs = pool.head(cfg.batch);
      Stopwatch sw(trace.rerank_ms);
      out.ranked = rerank_plain(query, pool, r.graph, r.reranker, cfg.budget);
      ++trace.rerank_calls;
      break;
    }
    case Method::PageRank: {
      RankedList seeds;
      {
        Stopwatch sw(trace.vs_ms);
        seeds = vector_search(qv, r.index, cfg.batch);
        ++trace.vector_search_calls;
      }
      trace.initial_vs = seeds;
      std::vector<ScoredNode> weights;
      bool any_positive = false;
      for (const auto& s : seeds) {
        weights.push_back({s.key, std::max(0.0, s.score)});
        any_positive = any_positive || s.score > 0.0;
      }
      if (!any_positive)
        for (auto& w : weights) w.score = 1.0;
      RankedList expanded;
      {
        Stopwatch sw(trace.ppr_ms);
        const std::size_t want = cfg.budget - seeds.size();
        if (want > 0)
          expanded = personalized_pagerank(r.graph, RankedList(weights), params.ppr_restart, params.ppr_tol, want,
                                           cfg.view);
        ++trace.ppr_calls;
      }
      std::vector<ScoredNode> merged = seeds.entries();
      merged.insert(merged.end(), expanded.begin(), expanded.end());
      out.ranked = RankedList(std::move(merged));
      break;
    }
    case Method::FastInsight:
      break;
  }
  trace.total_ms = ms_since(start);
  return out;
}

}  // namespace graphret
