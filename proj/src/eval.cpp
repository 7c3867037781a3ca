#include "graphret/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "graphret/io.hpp"
#include "graphret/remote.hpp"

namespace graphret {

void RunConfig::validate() const {
  params.fastinsight.validate();
  if (params.re2_pool < 1) throw ValidationError("re2 pool must be at least 1");
  if (!(params.ppr_restart > 0.0 && params.ppr_restart < 1.0))
    throw ValidationError("PageRank restart must lie in (0, 1)");
  if (jobs < 1) throw ValidationError("jobs must be at least 1");
  if (encoder == EncoderKind::Remote && remote_url.empty())
    throw ValidationError("the remote encoder needs --remote-url");
  if (!remote_reranker_url.empty() && head_path.empty())
    throw ValidationError("the remote reranker needs a head weights file");
  if (encoder == EncoderKind::Hash && dimension < 8) throw ValidationError("hash dimension must be at least 8");
  for (const auto* p : {&nodes, &edges, &queries, &qrels}) {
    if (p->empty()) throw ValidationError("missing dataset path");
    if (!std::filesystem::exists(*p)) throw ValidationError("no such file: " + p->string());
  }
  if (!head_path.empty() && !std::filesystem::exists(head_path))
    throw ValidationError("no such file: " + head_path.string());
}

namespace {

std::unique_ptr<Embedder> make_embedder(const RunConfig& cfg) {
  if (cfg.encoder == EncoderKind::Remote) return std::make_unique<RemoteEmbedder>(cfg.remote_url, cfg.remote_batch);
  return std::make_unique<HashEmbedder>(cfg.dimension);
}

std::unique_ptr<Reranker> make_reranker(const RunConfig& cfg) {
  if (!cfg.remote_reranker_url.empty())
    return std::make_unique<RemoteReranker>(cfg.remote_reranker_url, AffineHead::load(cfg.head_path));
  return std::make_unique<HashReranker>(cfg.dimension, cfg.seed);
}

IndexOptions index_options(const RunConfig& cfg) {
  IndexOptions opts;
  opts.cache_path = cfg.vector_cache;
  opts.batch_size = cfg.remote_batch;
  opts.threads = cfg.jobs;
  return opts;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Evaluator::Evaluator(const RunConfig& cfg)
    : Evaluator(cfg, load_dataset(cfg.nodes, cfg.edges, cfg.queries, cfg.qrels), make_embedder(cfg),
                make_reranker(cfg)) {}

Evaluator::Evaluator(const RunConfig& cfg, Dataset dataset, std::unique_ptr<Embedder> embedder,
                     std::unique_ptr<Reranker> reranker)
    : cfg_(cfg), dataset_(std::move(dataset)), embedder_(std::move(embedder)), reranker_(std::move(reranker)) {
  if (dataset_.graph.empty()) throw ValidationError("dataset graph is empty");
  index_ = build_index(dataset_.graph, *embedder_, index_options(cfg_));
}

EvalReport Evaluator::run(const MethodParams& params, const std::function<void(const EvalReport&)>& partial) const {
  params.fastinsight.validate();
  const auto& queries = dataset_.queries;
  const auto retr = retriever();
  MetricOptions mopts;
  mopts.k = params.fastinsight.k_report;
  mopts.k_total = params.fastinsight.budget;
  mopts.k_vs = params.fastinsight.batch;
  mopts.topology = {params.fastinsight.view, cfg_.path_rule};

  std::vector<std::optional<QueryRow>> rows(queries.size());
  auto run_one = [&](std::size_t i) {
    const auto& q = queries[i];
    auto result = retrieve(cfg_.method, q.text, retr, params);
    QueryRow row;
    row.query_id = q.id;
    const auto t0 = std::chrono::steady_clock::now();
    row.metrics = evaluate_query(dataset_.graph, result.ranked, result.trace.initial_vs, dataset_.qrels.at(q.id), mopts);
    row.timing.metrics_ms = elapsed_ms(t0);
    const auto& tr = result.trace;
    row.timing.embed_ms = tr.embed_ms;
    row.timing.vs_ms = tr.vs_ms;
    row.timing.granker_ms = tr.granker_ms;
    row.timing.stex_ms = tr.stex_ms;
    row.timing.rerank_ms = tr.rerank_ms;
    row.timing.ppr_ms = tr.ppr_ms;
    row.timing.qpt_ms = tr.total_ms;
    row.retrieved = result.ranked.size();
    row.granker_calls = tr.granker_calls;
    row.stex_calls = tr.stex_calls;
    rows[i] = std::move(row);
  };

  std::optional<std::pair<std::size_t, std::string>> failure;
  std::mutex failure_mu;
  auto guarded = [&](std::size_t i) {
    try {
      run_one(i);
    } catch (const std::exception& e) {
      std::lock_guard lock(failure_mu);
      if (!failure || i < failure->first) failure = {i, e.what()};
    }
  };

  std::size_t jobs = cfg_.jobs;
  if (!embedder_->concurrent_safe() || !reranker_->concurrent_safe()) jobs = 1;
  jobs = std::max<std::size_t>(1, std::min(jobs, queries.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < queries.size() && !failure; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; !stop && (i = next.fetch_add(1)) < queries.size();) {
          guarded(i);
          if (failure) stop = true;
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<QueryRow> done;
  for (auto& r : rows)
    if (r) done.push_back(std::move(*r));
  auto report = summarize(std::move(done), params.fastinsight.budget);
  if (failure) {
    if (partial) partial(report);
    throw QueryFailure(queries[failure->first].id, failure->second);
  }
  return report;
}

EvalReport summarize(std::vector<QueryRow> rows, std::size_t budget) {
  std::sort(rows.begin(), rows.end(), [](const QueryRow& a, const QueryRow& b) { return a.query_id < b.query_id; });
  EvalReport report;
  report.budget = budget;
  report.rows = std::move(rows);
  const auto n = report.rows.size();
  if (n == 0) return report;

  auto& m = report.mean;
  for (const auto& r : report.rows) {
    m.recall_at_k += r.metrics.recall_at_k;
    m.ndcg_at_k += r.metrics.ndcg_at_k;
    m.recall_uncapped += r.metrics.recall_uncapped;
    m.tr += r.metrics.tr;
    m.miss_tr += r.metrics.miss_tr;
    m.recall_total += r.metrics.recall_total;
    m.recall_vs += r.metrics.recall_vs;
    m.delta_r += r.metrics.delta_r;
  }
  const double dn = static_cast<double>(n);
  for (double* v : {&m.recall_at_k, &m.ndcg_at_k, &m.recall_uncapped, &m.tr, &m.miss_tr, &m.recall_total,
                    &m.recall_vs, &m.delta_r})
    *v /= dn;

  // Timing aggregates skip warm-up queries.
  auto& t = report.timing;
  t.warmup_excluded = n > kWarmupQueries ? kWarmupQueries : 0;
  std::vector<double> qpt;
  for (std::size_t i = t.warmup_excluded; i < n; ++i) {
    const auto& s = report.rows[i].timing;
    qpt.push_back(s.qpt_ms);
    t.stage_mean.embed_ms += s.embed_ms;
    t.stage_mean.vs_ms += s.vs_ms;
    t.stage_mean.granker_ms += s.granker_ms;
    t.stage_mean.stex_ms += s.stex_ms;
    t.stage_mean.rerank_ms += s.rerank_ms;
    t.stage_mean.ppr_ms += s.ppr_ms;
    t.stage_mean.metrics_ms += s.metrics_ms;
    t.stage_mean.qpt_ms += s.qpt_ms;
  }
  const double dt = static_cast<double>(qpt.size());
  for (double* v : {&t.stage_mean.embed_ms, &t.stage_mean.vs_ms, &t.stage_mean.granker_ms, &t.stage_mean.stex_ms,
                    &t.stage_mean.rerank_ms, &t.stage_mean.ppr_ms, &t.stage_mean.metrics_ms, &t.stage_mean.qpt_ms})
    *v /= dt;
  t.qpt_mean_ms = t.stage_mean.qpt_ms;
  std::sort(qpt.begin(), qpt.end());
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(qpt.size())));
  t.qpt_p95_ms = qpt[std::max<std::size_t>(rank, 1) - 1];
  return report;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string format_per_query_csv(const EvalReport& report, std::size_t k) {
  const auto ks = std::to_string(k);
  std::string out = "query_id,r" + ks + ",ndcg" + ks +
                    ",recall_uncapped,tr,miss_tr,recall_total,recall_vs,delta_r,retrieved\n";
  for (const auto& r : report.rows) {
    const auto& m = r.metrics;
    out += r.query_id + "," + num(m.recall_at_k) + "," + num(m.ndcg_at_k) + "," + num(m.recall_uncapped) + "," +
           num(m.tr) + "," + num(m.miss_tr) + "," + num(m.recall_total) + "," + num(m.recall_vs) + "," +
           num(m.delta_r) + "," + std::to_string(r.retrieved) + "\n";
  }
  return out;
}

std::string format_timing_csv(const EvalReport& report) {
  std::string out = "query_id,qpt_ms,embed_ms,vs_ms,granker_ms,stex_ms,rerank_ms,ppr_ms,metrics_ms\n";
  for (const auto& r : report.rows) {
    const auto& t = r.timing;
    out += r.query_id + "," + num(t.qpt_ms) + "," + num(t.embed_ms) + "," + num(t.vs_ms) + "," + num(t.granker_ms) +
           "," + num(t.stex_ms) + "," + num(t.rerank_ms) + "," + num(t.ppr_ms) + "," + num(t.metrics_ms) + "\n";
  }
  return out;
}

nlohmann::json report_json(const EvalReport& report, const RunConfig& cfg, const MethodParams& params) {
  const auto& fi = params.fastinsight;
  const auto& m = report.mean;
  const auto& t = report.timing;
  nlohmann::json config{
      {"nodes", cfg.nodes.string()},
      {"edges", cfg.edges.string()},
      {"queries", cfg.queries.string()},
      {"qrels", cfg.qrels.string()},
      {"method", std::string(to_string(cfg.method))},
      {"batch", fi.batch},
      {"alpha", fi.alpha},
      {"beta", fi.beta},
      {"budget", fi.budget},
      {"k", fi.k_report},
      {"view", std::string(to_string(fi.view))},
      {"path_rule", cfg.path_rule == PathRule::MinCost ? "min-cost" : "hop-shortest"},
      {"re2_pool", params.re2_pool},
      {"ppr_restart", params.ppr_restart},
      {"encoder", cfg.encoder == EncoderKind::Hash ? "hash" : "remote"},
      {"remote_url", cfg.remote_url},
      {"dimension", cfg.dimension},
      {"jobs", cfg.jobs},
      {"seed", cfg.seed},
  };
  return {
      {"config", std::move(config)},
      {"queries", report.rows.size()},
      {"metrics",
       {{"recall_at_k", m.recall_at_k},
        {"ndcg_at_k", m.ndcg_at_k},
        {"recall_uncapped", m.recall_uncapped},
        {"tr", m.tr},
        {"miss_tr", m.miss_tr},
        {"recall_total", m.recall_total},
        {"recall_vs", m.recall_vs},
        {"delta_r", m.delta_r}}},
      {"timing",
       {{"warmup_excluded", t.warmup_excluded},
        {"qpt_ms_mean", t.qpt_mean_ms},
        {"qpt_ms_p95", t.qpt_p95_ms},
        {"embed_ms_mean", t.stage_mean.embed_ms},
        {"vs_ms_mean", t.stage_mean.vs_ms},
        {"granker_ms_mean", t.stage_mean.granker_ms},
        {"stex_ms_mean", t.stage_mean.stex_ms},
        {"rerank_ms_mean", t.stage_mean.rerank_ms},
        {"ppr_ms_mean", t.stage_mean.ppr_ms},
        {"metrics_ms_mean", t.stage_mean.metrics_ms}}},
  };
}

void write_report(const EvalReport& report, const RunConfig& cfg, const MethodParams& params,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_file(dir / "report.json", report_json(report, cfg, params).dump(2) + "\n");
  io::write_file(dir / "per_query.csv", format_per_query_csv(report, params.fastinsight.k_report));
  io::write_file(dir / "timing.csv", format_timing_csv(report));
}

std::vector<std::size_t> sweep_budgets(std::size_t batch) {
  std::vector<std::size_t> out;
  for (std::size_t b = 10; b <= 100; b += 10)
    if (b >= batch) out.push_back(b);
  return out;
}

std::vector<EvalReport> run_eval(const RunConfig& cfg) {
  cfg.validate();
  Evaluator evaluator(cfg);
  std::vector<EvalReport> reports;

  auto run_at = [&](const MethodParams& params, const std::filesystem::path& dir) {
    auto report = evaluator.run(params, [&](const EvalReport& partial) { write_report(partial, cfg, params, dir); });
    write_report(report, cfg, params, dir);
    reports.push_back(std::move(report));
  };

  if (!cfg.sweep_budget) {
    run_at(cfg.params, cfg.out_dir);
    return reports;
  }
  std::string sweep = "budget,r" + std::to_string(cfg.params.fastinsight.k_report) +
                      ",ndcg,recall_uncapped,tr,miss_tr,qpt_ms_mean,qpt_ms_p95\n";
  for (std::size_t b : sweep_budgets(cfg.params.fastinsight.batch)) {
    MethodParams params = cfg.params;
    params.fastinsight.budget = b;
    char name[32];
    std::snprintf(name, sizeof(name), "budget_%03zu", b);
    run_at(params, cfg.out_dir / name);
    const auto& r = reports.back();
    sweep += std::to_string(b) + "," + num(r.mean.recall_at_k) + "," + num(r.mean.ndcg_at_k) + "," +
             num(r.mean.recall_uncapped) + "," + num(r.mean.tr) + "," + num(r.mean.miss_tr) + "," +
             num(r.timing.qpt_mean_ms) + "," + num(r.timing.qpt_p95_ms) + "\n";
  }
  std::filesystem::create_directories(cfg.out_dir);
  io::write_file(cfg.out_dir / "sweep.csv", sweep);
  return reports;
}

}  // namespace graphret
