#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "graphret/dataset.hpp"
#include "graphret/embedding.hpp"
#include "graphret/engine.hpp"
#include "graphret/error.hpp"
#include "graphret/eval.hpp"
#include "graphret/granker.hpp"
#include "graphret/graph.hpp"
#include "graphret/metrics.hpp"
#include "graphret/pagerank.hpp"
#include "graphret/reranker.hpp"
#include "graphret/stex.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace graphret;

namespace {

using Pairs = std::vector<std::pair<std::string, double>>;

RankedList to_ranked(const Pairs& entries) {
  std::vector<ScoredNode> out;
  out.reserve(entries.size());
  for (const auto& [k, s] : entries) out.push_back({k, s});
  return RankedList(std::move(out));
}

// Plain key lists become a ranked list with descending placeholder scores.
RankedList to_ranked(const py::handle& obj) {
  std::vector<ScoredNode> out;
  double placeholder = static_cast<double>(py::len(obj));
  for (auto item : obj) {
    if (py::isinstance<py::str>(item)) {
      out.push_back({item.cast<std::string>(), placeholder});
    } else {
      auto pair = item.cast<std::pair<std::string, double>>();
      out.push_back({pair.first, pair.second});
    }
    placeholder -= 1.0;
  }
  return RankedList(std::move(out));
}

Pairs to_pairs(const RankedList& r) {
  Pairs out;
  out.reserve(r.size());
  for (const auto& e : r) out.emplace_back(e.key, e.score);
  return out;
}

KeySet to_keys(const std::vector<std::string>& keys) { return KeySet(keys.begin(), keys.end()); }

// Owns everything a Retriever borrows.
class Engine {
 public:
  Engine(CorpusGraph graph, std::size_t dimension, bool normalize, std::optional<std::filesystem::path> cache,
         std::uint64_t seed)
      : graph_(std::move(graph)), embedder_(dimension), reranker_(dimension, seed) {
    IndexOptions opts;
    opts.normalize = normalize;
    opts.cache_path = std::move(cache);
    index_ = build_index(graph_, embedder_, opts);
  }

  Retriever retriever() const { return {graph_, index_, embedder_, reranker_}; }
  const CorpusGraph& graph() const { return graph_; }
  const EmbeddingIndex& index() const { return index_; }
  const HashEmbedder& embedder() const { return embedder_; }
  const HashReranker& reranker() const { return reranker_; }

 private:
  CorpusGraph graph_;
  HashEmbedder embedder_;
  HashReranker reranker_;
  EmbeddingIndex index_;
};

py::dict trace_dict(const RetrievalTrace& t) {
  return py::dict("snapshots"_a = t.snapshots, "initial_vs"_a = to_pairs(t.initial_vs),
                  "vector_search_calls"_a = t.vector_search_calls, "granker_calls"_a = t.granker_calls,
                  "stex_calls"_a = t.stex_calls, "rerank_calls"_a = t.rerank_calls, "ppr_calls"_a = t.ppr_calls,
                  "embed_ms"_a = t.embed_ms, "vs_ms"_a = t.vs_ms, "granker_ms"_a = t.granker_ms,
                  "stex_ms"_a = t.stex_ms, "rerank_ms"_a = t.rerank_ms, "ppr_ms"_a = t.ppr_ms,
                  "total_ms"_a = t.total_ms);
}

py::dict metrics_dict(const QueryMetrics& m) {
  return py::dict("recall_at_k"_a = m.recall_at_k, "ndcg_at_k"_a = m.ndcg_at_k,
                  "recall_uncapped"_a = m.recall_uncapped, "tr"_a = m.tr, "miss_tr"_a = m.miss_tr,
                  "recall_total"_a = m.recall_total, "recall_vs"_a = m.recall_vs, "delta_r"_a = m.delta_r);
}

FastInsightConfig make_config(std::size_t batch, double alpha, double beta, std::size_t budget, View view) {
  FastInsightConfig cfg;
  cfg.batch = batch;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.budget = budget;
  cfg.view = view;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_graphret, m) {
  m.doc() = "Graph-aware retrieval core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<LookupError>(m, "LookupError", base);
  py::register_exception<DimensionError>(m, "DimensionError", base);
  py::register_exception<CacheError>(m, "CacheError", base);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base);
  py::register_exception<ModelError>(m, "ModelError", base);

  py::enum_<View>(m, "View")
      .value("OUT", View::Out)
      .value("IN", View::In)
      .value("UNDIRECTED", View::Undirected);
  py::enum_<PathRule>(m, "PathRule")
      .value("MIN_COST", PathRule::MinCost)
      .value("HOP_SHORTEST", PathRule::HopShortest);

  py::class_<CorpusGraph>(m, "CorpusGraph")
      .def(py::init([](const std::vector<std::pair<std::string, std::string>>& nodes,
                       const std::vector<std::pair<std::string, std::string>>& edges) {
             std::vector<NodeRecord> records;
             for (const auto& [k, c] : nodes) records.push_back({k, c});
             return CorpusGraph::build(std::move(records), edges);
           }),
           "nodes"_a, "edges"_a, "Build from (key, content) pairs and (src, dst) edges.")
      .def_static(
          "load", [](const std::filesystem::path& nodes, const std::filesystem::path& edges) {
            return load_graph_files(nodes, edges);
          },
          "nodes"_a, "edges"_a)
      .def_property_readonly("node_count", &CorpusGraph::node_count)
      .def_property_readonly("edge_count", &CorpusGraph::edge_count)
      .def("keys",
           [](const CorpusGraph& g) {
             std::vector<std::string> out;
             for (const auto& n : g.nodes()) out.push_back(n.key);
             return out;
           })
      .def("content", [](const CorpusGraph& g, const std::string& key) { return g.node(g.id_of(key)).content; })
      .def("neighbors", &CorpusGraph::neighbors, "key"_a, "view"_a = View::Undirected)
      .def(
          "degree", [](const CorpusGraph& g, const std::string& key, View view) { return g.degree(key, view); },
          "key"_a, "view"_a = View::Undirected)
      .def("__contains__", [](const CorpusGraph& g, const std::string& key) { return g.contains(key); })
      .def("__len__", &CorpusGraph::node_count);

  m.def("frontier", [](const CorpusGraph& g, const py::list& ret, View view) { return frontier(g, to_ranked(ret), view); },
        "graph"_a, "retrieved"_a, "view"_a = View::Undirected);

  m.def("hash_embed", &hash_embed, "text"_a, "d"_a = HashEmbedder::kDefaultDimension);

  py::class_<HashEmbedder>(m, "HashEmbedder")
      .def(py::init<std::size_t>(), "d"_a = HashEmbedder::kDefaultDimension)
      .def_property_readonly("dimension", &HashEmbedder::dimension)
      .def("encode", &HashEmbedder::encode_query, "text"_a);

  py::class_<HashReranker>(m, "HashReranker")
      .def(py::init<std::size_t, std::uint64_t>(), "d"_a = HashEmbedder::kDefaultDimension,
           "seed"_a = HashReranker::kDefaultSeed)
      .def("score", &HashReranker::score, "query"_a, "content"_a)
      .def("extract_latent", &HashReranker::extract_latent, "query"_a, "content"_a);

  py::class_<EmbeddingIndex>(m, "VectorIndex")
      .def(py::init([](const CorpusGraph& g, const HashEmbedder& emb, bool normalize,
                       std::optional<std::filesystem::path> cache) {
             IndexOptions opts;
             opts.normalize = normalize;
             opts.cache_path = std::move(cache);
             return build_index(g, emb, opts);
           }),
           "graph"_a, "embedder"_a, "normalize"_a = true, "cache_path"_a = py::none())
      .def_property_readonly("dimension", &EmbeddingIndex::dimension)
      .def("__len__", &EmbeddingIndex::size)
      .def("vector",
           [](const EmbeddingIndex& idx, const std::string& key) {
             auto v = idx.vector(key);
             return Vector(v.begin(), v.end());
           })
      .def("prepare_query", [](const EmbeddingIndex& idx, Vector v) { return prepare_query(std::move(v), idx); });

  m.def(
      "vector_search",
      [](const Vector& q, const EmbeddingIndex& idx, std::size_t k) { return to_pairs(vector_search(q, idx, k)); },
      "query_vector"_a, "index"_a, "k"_a);

  m.def(
      "personalized_pagerank",
      [](const CorpusGraph& g, const py::list& seeds, double restart, double tol, std::size_t k, View view) {
        return to_pairs(personalized_pagerank(g, to_ranked(seeds), restart, tol, k, view));
      },
      "graph"_a, "seeds"_a, "restart"_a = 0.15, "tol"_a = 1e-8, "k"_a = 10, "view"_a = View::Undirected);

  m.def(
      "rerank_plain",
      [](const std::string& q, const py::list& ret, const CorpusGraph& g, const HashReranker& rr, std::size_t k) {
        return to_pairs(rerank_plain(q, to_ranked(ret), g, rr, k));
      },
      "query"_a, "retrieved"_a, "graph"_a, "reranker"_a, "k"_a);

  m.def(
      "build_propagation",
      [](const py::list& ret, const CorpusGraph& g, View view) {
        auto p = build_propagation(to_ranked(ret), g, view);
        return py::make_tuple(p.p, p.isolated_rows);
      },
      "retrieved"_a, "graph"_a, "view"_a = View::Undirected, "Returns (P, isolated_rows).");

  m.def(
      "fuse_latents",
      [](const Eigen::MatrixXd& h, const Eigen::MatrixXd& p, const std::vector<std::size_t>& isolated, double alpha) {
        LatentBatch batch;
        batch.values = h;
        batch.keys.resize(static_cast<std::size_t>(h.rows()));
        return fuse_latents(batch, PropagationMatrix{p, isolated}, alpha).values;
      },
      "h"_a, "p"_a, "isolated_rows"_a, "alpha"_a);

  m.def(
      "granker",
      [](const std::string& q, const py::list& ret, const CorpusGraph& g, double alpha, const HashReranker& rr,
         View view) { return to_pairs(granker(q, to_ranked(ret), g, alpha, rr, view)); },
      "query"_a, "retrieved"_a, "graph"_a, "alpha"_a, "reranker"_a, "view"_a = View::Undirected);

  m.def(
      "stex",
      [](const Vector& q, const EmbeddingIndex& idx, const CorpusGraph& g, const py::list& ret, double beta, View view) {
        py::list out;
        for (const auto& s : stex_scores(q, idx, g, to_ranked(ret), beta, view))
          out.append(py::dict("key"_a = s.key, "rank_term"_a = s.rank_term, "bridging_term"_a = s.bridging_term,
                              "i_struct"_a = s.i_struct, "i_sim"_a = s.i_sim, "total"_a = s.total));
        return out;
      },
      "query_vector"_a, "index"_a, "graph"_a, "retrieved"_a, "beta"_a = 1.0, "view"_a = View::Undirected);

  py::class_<Engine>(m, "Engine")
      .def(py::init<CorpusGraph, std::size_t, bool, std::optional<std::filesystem::path>, std::uint64_t>(), "graph"_a,
           "dimension"_a = HashEmbedder::kDefaultDimension, "normalize"_a = true, "cache_path"_a = py::none(),
           "seed"_a = HashReranker::kDefaultSeed)
      .def_property_readonly("graph", &Engine::graph, py::return_value_policy::reference_internal)
      .def_property_readonly("index", &Engine::index, py::return_value_policy::reference_internal)
      .def_property_readonly("embedder", &Engine::embedder, py::return_value_policy::reference_internal)
      .def_property_readonly("reranker", &Engine::reranker, py::return_value_policy::reference_internal)
      .def(
          "fastinsight",
          [](const Engine& e, const std::string& q, std::size_t batch, double alpha, double beta, std::size_t budget,
             View view) {
            Retrieval r;
            {
              py::gil_scoped_release release;
              r = fastinsight_retrieve(q, e.retriever(), make_config(batch, alpha, beta, budget, view));
            }
            return py::make_tuple(to_pairs(r.ranked), trace_dict(r.trace));
          },
          "query"_a, "batch"_a = 10, "alpha"_a = 0.2, "beta"_a = 1.0, "budget"_a = 100, "view"_a = View::Undirected)
      .def(
          "retrieve",
          [](const Engine& e, const std::string& method, const std::string& q, std::size_t batch, double alpha,
             double beta, std::size_t budget, std::size_t re2_pool) {
            MethodParams params;
            params.fastinsight = make_config(batch, alpha, beta, budget, View::Undirected);
            params.re2_pool = re2_pool;
            Retrieval r;
            {
              py::gil_scoped_release release;
              r = retrieve(parse_method(method), q, e.retriever(), params);
            }
            return py::make_tuple(to_pairs(r.ranked), trace_dict(r.trace));
          },
          "method"_a, "query"_a, "batch"_a = 10, "alpha"_a = 0.2, "beta"_a = 1.0, "budget"_a = 100,
          "re2_pool"_a = 100)
      .def(
          "vector_search",
          [](const Engine& e, const std::string& q, std::size_t k) {
            return to_pairs(baseline_vs(q, e.embedder(), e.index(), k));
          },
          "query"_a, "k"_a = 10);

  m.def(
      "capped_recall_at_k",
      [](const py::list& ret, const std::vector<std::string>& oracle, std::size_t k) {
        return capped_recall_at_k(to_ranked(ret), to_keys(oracle), k);
      },
      "retrieved"_a, "oracle"_a, "k"_a = 10);
  m.def(
      "recall_uncapped",
      [](const py::list& ret, const std::vector<std::string>& oracle) {
        return recall_uncapped(to_ranked(ret), to_keys(oracle));
      },
      "retrieved"_a, "oracle"_a);
  m.def(
      "ndcg_at_k",
      [](const py::list& ret, const std::vector<std::string>& oracle, std::size_t k) {
        return ndcg_at_k(to_ranked(ret), to_keys(oracle), k);
      },
      "retrieved"_a, "oracle"_a, "k"_a = 10);
  m.def(
      "uncertainty",
      [](const CorpusGraph& g, const std::vector<std::string>& ret, const std::string& target, View view,
         PathRule rule) { return uncertainty(g, to_keys(ret), target, {view, rule}); },
      "graph"_a, "retrieved"_a, "target"_a, "view"_a = View::Undirected, "rule"_a = PathRule::MinCost);
  m.def(
      "topological_recall",
      [](const CorpusGraph& g, const py::list& ret, const std::vector<std::string>& oracle, View view, PathRule rule) {
        return topological_recall(g, to_ranked(ret), to_keys(oracle), {view, rule});
      },
      "graph"_a, "retrieved"_a, "oracle"_a, "view"_a = View::Undirected, "rule"_a = PathRule::MinCost);
  m.def(
      "miss_tr",
      [](const CorpusGraph& g, const py::list& ret, const std::vector<std::string>& oracle, View view, PathRule rule) {
        return miss_tr(g, to_ranked(ret), to_keys(oracle), {view, rule});
      },
      "graph"_a, "retrieved"_a, "oracle"_a, "view"_a = View::Undirected, "rule"_a = PathRule::MinCost);
  m.def(
      "marginal_recall_gain",
      [](const py::list& final_list, const py::list& initial, const std::vector<std::string>& oracle,
         std::size_t k_total, std::size_t k_vs) {
        return marginal_recall_gain(to_ranked(final_list), to_ranked(initial), to_keys(oracle), k_total, k_vs);
      },
      "final"_a, "initial_vs"_a, "oracle"_a, "k_total"_a = 100, "k_vs"_a = 10);

  m.def(
      "synth_bridge",
      [](const std::filesystem::path& out, std::size_t n_clusters, std::size_t cluster_size, std::size_t decoys,
         std::uint64_t seed) {
        BridgeSpec spec;
        spec.n_clusters = n_clusters;
        spec.cluster_size = cluster_size;
        spec.decoys = decoys;
        spec.seed = seed;
        write_dataset(synth_bridge(spec), out);
      },
      "out"_a, "n_clusters"_a = 60, "cluster_size"_a = 30, "decoys"_a = 24, "seed"_a = 7,
      "Write a synthetic bridge dataset (nodes.jsonl, edges.tsv, queries.jsonl, qrels.tsv) into `out`.");

  m.def(
      "evaluate",
      [](const std::filesystem::path& data, const std::string& method, const std::filesystem::path& out,
         std::size_t batch, double alpha, double beta, std::size_t budget, std::size_t jobs) {
        RunConfig cfg;
        cfg.nodes = data / "nodes.jsonl";
        cfg.edges = data / "edges.tsv";
        cfg.queries = data / "queries.jsonl";
        cfg.qrels = data / "qrels.tsv";
        cfg.method = parse_method(method);
        cfg.params.fastinsight = make_config(batch, alpha, beta, budget, View::Undirected);
        cfg.out_dir = out;
        cfg.jobs = jobs;
        std::vector<EvalReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_eval(cfg);
        }
        const auto& r = reports.front();
        auto result = metrics_dict(r.mean);
        result["queries"] = r.rows.size();
        result["qpt_ms_mean"] = r.timing.qpt_mean_ms;
        result["qpt_ms_p95"] = r.timing.qpt_p95_ms;
        return result;
      },
      "data_dir"_a, "method"_a = "fastinsight", "out"_a = "out", "batch"_a = 10, "alpha"_a = 0.2, "beta"_a = 1.0,
      "budget"_a = 100, "jobs"_a = 1,
      "Run one method over a dataset directory, write reports into `out` and return mean metrics.");
}
