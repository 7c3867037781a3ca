#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphret/dataset.hpp"
#include "graphret/embedding.hpp"
#include "graphret/error.hpp"
#include "graphret/engine.hpp"
#include "graphret/metrics.hpp"
#include "graphret/reranker.hpp"

namespace graphret {

enum class EncoderKind { Hash, Remote };

struct RunConfig {
  std::filesystem::path nodes, edges, queries, qrels;
  Method method = Method::FastInsight;
  MethodParams params;
  EncoderKind encoder = EncoderKind::Hash;
  std::string remote_url;           // embedder endpoint
  std::string remote_reranker_url;  // empty: offline hash reranker
  std::filesystem::path head_path;  // head weights for the remote reranker
  std::size_t dimension = HashEmbedder::kDefaultDimension;
  std::size_t remote_batch = 64;
  std::optional<std::filesystem::path> vector_cache;
  std::filesystem::path out_dir = "out";
  std::size_t jobs = 1;
  std::uint64_t seed = HashReranker::kDefaultSeed;
  PathRule path_rule = PathRule::MinCost;
  bool sweep_budget = false;

  // Checks parameters and that input files exist; loads nothing.
  void validate() const;
};

struct StageTimes {
  double embed_ms = 0.0;
  double vs_ms = 0.0;
  double granker_ms = 0.0;
  double stex_ms = 0.0;
  double rerank_ms = 0.0;
  double ppr_ms = 0.0;
  double metrics_ms = 0.0;
  double qpt_ms = 0.0;  // whole retrieval including query embedding; excludes metrics
};

struct QueryRow {
  std::string query_id;
  QueryMetrics metrics;
  StageTimes timing;
  std::size_t retrieved = 0;
  std::size_t granker_calls = 0;
  std::size_t stex_calls = 0;
};

struct TimingSummary {
  std::size_t warmup_excluded = 0;
  double qpt_mean_ms = 0.0;
  double qpt_p95_ms = 0.0;
  StageTimes stage_mean;
};

struct EvalReport {
  std::size_t budget = 0;
  std::vector<QueryRow> rows;  // ordered by query id
  QueryMetrics mean;
  TimingSummary timing;
};

// Queries whose rows are dropped from timing aggregates.
inline constexpr std::size_t kWarmupQueries = 3;

// Shared state for a batch of evaluations over one dataset.
class Evaluator {
 public:
  explicit Evaluator(const RunConfig& cfg);
  Evaluator(const RunConfig& cfg, Dataset dataset, std::unique_ptr<Embedder> embedder,
            std::unique_ptr<Reranker> reranker);

  const Dataset& dataset() const { return dataset_; }
  const EmbeddingIndex& index() const { return index_; }
  Retriever retriever() const { return {dataset_.graph, index_, *embedder_, *reranker_}; }

  // Runs every query through the configured method with `params`. A query that
  // throws aborts the run with QueryFailure after the completed rows are handed
  // to `partial` (if given).
  EvalReport run(const MethodParams& params,
                 const std::function<void(const EvalReport&)>& partial = nullptr) const;

 private:
  RunConfig cfg_;
  Dataset dataset_;
  std::unique_ptr<Embedder> embedder_;
  std::unique_ptr<Reranker> reranker_;
  EmbeddingIndex index_;
};

class QueryFailure : public Error {
 public:
  QueryFailure(const std::string& query_id, const std::string& what)
      : Error("query " + query_id + ": " + what), query_id_(query_id) {}
  const std::string& query_id() const { return query_id_; }

 private:
  std::string query_id_;
};

EvalReport summarize(std::vector<QueryRow> rows, std::size_t budget);

// per_query.csv: query_id, r10, ndcg10, recall_uncapped, tr, miss_tr, recall_total, recall_vs, delta_r, retrieved
std::string format_per_query_csv(const EvalReport& report, std::size_t k);
// timing.csv: query_id, qpt_ms, embed_ms, vs_ms, granker_ms, stex_ms, rerank_ms, ppr_ms, metrics_ms
std::string format_timing_csv(const EvalReport& report);
nlohmann::json report_json(const EvalReport& report, const RunConfig& cfg, const MethodParams& params);

// Writes report.json, per_query.csv and timing.csv into `dir`.
void write_report(const EvalReport& report, const RunConfig& cfg, const MethodParams& params,
                  const std::filesystem::path& dir);

// Single run, or with cfg.sweep_budget one run per budget 10, 20, ..., 100 written to
// out/budget_NNN plus out/sweep.csv. Returns the reports in budget order.
std::vector<EvalReport> run_eval(const RunConfig& cfg);

std::vector<std::size_t> sweep_budgets(std::size_t batch);

}  // namespace graphret
