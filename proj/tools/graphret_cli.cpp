// graphret: run retrieval methods over a corpus-graph dataset and report metrics.
//
//   graphret run --nodes n.jsonl --edges e.tsv --queries q.jsonl --qrels r.tsv --method fastinsight --out out/
//   graphret synth --out data/ --clusters 60 --cluster-size 30 --seed 7

#include <CLI11.hpp>

#include <iostream>

#include "graphret/dataset.hpp"
#include "graphret/error.hpp"
#include "graphret/eval.hpp"

namespace {

int run(graphret::RunConfig& cfg, const std::string& method, const std::string& encoder, const std::string& view,
        const std::string& path_rule) {
  cfg.method = graphret::parse_method(method);
  cfg.params.fastinsight.view = graphret::parse_view(view);
  cfg.path_rule = graphret::parse_path_rule(path_rule);
  if (encoder == "hash") {
    cfg.encoder = graphret::EncoderKind::Hash;
  } else if (encoder == "remote") {
    cfg.encoder = graphret::EncoderKind::Remote;
  } else {
    throw graphret::ValidationError("unknown encoder: " + encoder);
  }
  const auto reports = graphret::run_eval(cfg);
  for (const auto& r : reports) {
    std::cout << "budget=" << r.budget << " queries=" << r.rows.size() << " r@" << cfg.params.fastinsight.k_report
              << "=" << r.mean.recall_at_k << " ndcg=" << r.mean.ndcg_at_k << " tr=" << r.mean.tr
              << " qpt_ms=" << r.timing.qpt_mean_ms << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus-graph retrieval and evaluation"};
  app.require_subcommand(1);

  graphret::RunConfig cfg;
  std::string method = "fastinsight", encoder = "hash", view = "undirected", path_rule = "min-cost";
  std::string cache;
  auto* run_cmd = app.add_subcommand("run", "Retrieve for every query and write report.json / per_query.csv");
  run_cmd->add_option("--nodes", cfg.nodes, "Nodes file (JSON lines, optionally gzip)")->required();
  run_cmd->add_option("--edges", cfg.edges, "Edges file (TSV, optionally gzip)")->required();
  run_cmd->add_option("--queries", cfg.queries, "Queries file (JSON lines)")->required();
  run_cmd->add_option("--qrels", cfg.qrels, "Qrels file (TSV)")->required();
  run_cmd->add_option("--method", method, "vs | re2 | fastinsight | ppr")->capture_default_str();
  auto& fi = cfg.params.fastinsight;
  run_cmd->add_option("--batch", fi.batch, "Nodes added per iteration")->capture_default_str();
  run_cmd->add_option("--alpha", fi.alpha, "GRanker smoothing factor")->capture_default_str();
  run_cmd->add_option("--beta", fi.beta, "STeX structural weight")->capture_default_str();
  run_cmd->add_option("--budget", fi.budget, "Maximum retrieved nodes")->capture_default_str();
  run_cmd->add_option("--k", fi.k_report, "Metric cutoff")->capture_default_str();
  run_cmd->add_option("--view", view, "Edge view: undirected | out | in")->capture_default_str();
  run_cmd->add_option("--path-rule", path_rule, "Uncertainty path: min-cost | hop-shortest")->capture_default_str();
  run_cmd->add_option("--re2-pool", cfg.params.re2_pool, "Vector-search pool reranked by re2")->capture_default_str();
  run_cmd->add_option("--ppr-restart", cfg.params.ppr_restart, "PageRank restart probability")->capture_default_str();
  run_cmd->add_option("--encoder", encoder, "hash | remote")->capture_default_str();
  run_cmd->add_option("--remote-url", cfg.remote_url, "Embedding endpoint for --encoder remote");
  run_cmd->add_option("--reranker-url", cfg.remote_reranker_url, "Latent-extraction endpoint for a remote reranker");
  run_cmd->add_option("--head", cfg.head_path, "Scoring-head weights (JSON) for the remote reranker");
  run_cmd->add_option("--remote-batch", cfg.remote_batch, "Texts per remote request")->capture_default_str();
  run_cmd->add_option("--dim", cfg.dimension, "Hash embedding dimension")->capture_default_str();
  run_cmd->add_option("--vector-cache", cache, "Binary vector cache, read if present and written otherwise");
  run_cmd->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--jobs", cfg.jobs, "Concurrent queries")->capture_default_str();
  run_cmd->add_option("--seed", cfg.seed, "Seed of the offline reranker head")->capture_default_str();
  run_cmd->add_flag("--sweep-budget", cfg.sweep_budget, "One report per budget 10..100");

  graphret::BridgeSpec spec;
  std::filesystem::path synth_out = "data";
  auto* synth_cmd = app.add_subcommand("synth", "Generate the bridge fixture dataset");
  synth_cmd->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth_cmd->add_option("--clusters", spec.n_clusters, "Clusters (one query each)")->capture_default_str();
  synth_cmd->add_option("--cluster-size", spec.cluster_size, "Background nodes per cluster")->capture_default_str();
  synth_cmd->add_option("--decoys", spec.decoys, "Decoy nodes per cluster")->capture_default_str();
  synth_cmd->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      if (!cache.empty()) cfg.vector_cache = cache;
      return run(cfg, method, encoder, view, path_rule);
    }
    if (*synth_cmd) {
      graphret::write_dataset(graphret::synth_bridge(spec), synth_out);
      std::cout << "wrote " << synth_out.string() << "\n";
      return 0;
    }
  } catch (const graphret::QueryFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const graphret::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
