#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "graphret/error.hpp"
#include "graphret/metrics.hpp"
#include "oracles.hpp"

using namespace graphret;

namespace {

KeySet keyset(std::initializer_list<const char*> keys) {
  KeySet s;
  for (auto k : keys) s.insert(k);
  return s;
}

std::vector<NodeKey> gold_names(std::size_t n) {
  std::vector<NodeKey> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("g" + fixtures::node_name(i));
  return out;
}

std::vector<NodeKey> filler_names(std::size_t n) {
  std::vector<NodeKey> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("x" + fixtures::node_name(i));
  return out;
}

}  // namespace

TEST_CASE("capped recall") {
  auto gold = gold_names(20);
  KeySet oracle(gold.begin(), gold.end());
  CHECK(capped_recall_at_k(fixtures::ranked({gold.begin(), gold.begin() + 10}), oracle, 10) == 1.0);
  CHECK(capped_recall_at_k(fixtures::ranked(filler_names(10)), oracle, 10) == 0.0);

  auto five = gold_names(5);
  auto list = filler_names(7);
  list.insert(list.begin() + 2, five[0]);
  list.insert(list.begin() + 5, five[1]);
  list.push_back(five[2]);
  KeySet oracle5(five.begin(), five.end());
  CHECK(capped_recall_at_k(fixtures::ranked(list), oracle5, 10) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(capped_recall_at_k(fixtures::ranked(list), oracle5, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(capped_recall_at_k(fixtures::ranked(list), KeySet{}, 10), ValidationError);
  CHECK_THROWS_AS(capped_recall_at_k(fixtures::ranked(list), oracle5, 0), ValidationError);
}

TEST_CASE("ndcg") {
  auto gold = gold_names(12);
  KeySet oracle(gold.begin(), gold.end());
  CHECK(ndcg_at_k(fixtures::ranked({gold.begin(), gold.begin() + 10}), oracle, 10) == doctest::Approx(1.0));
  CHECK(ndcg_at_k(fixtures::ranked(filler_names(10)), oracle, 10) == 0.0);
  const double second = ndcg_at_k(fixtures::ranked({"x", "g", "y"}), keyset({"g"}), 10);
  CHECK(second == doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-15));
  CHECK(second == doctest::Approx(0.6309).epsilon(1e-4));
  CHECK_THROWS_AS(ndcg_at_k(fixtures::ranked({"x"}), KeySet{}, 10), ValidationError);
}

TEST_CASE("uncertainty and TR on a path") {
  auto g = fixtures::graph({"a", "b", "c", "z"}, {{"a", "b"}, {"b", "c"}});
  const double u = std::log(2.0) + std::log(3.0);
  CHECK(uncertainty(g, keyset({"a"}), "c") == doctest::Approx(u).epsilon(1e-15));
  CHECK(uncertainty(g, keyset({"a"}), "a") == 0.0);
  CHECK(uncertainty(g, keyset({"a"}), "z") == kUnreachable);
  CHECK_THROWS_AS(uncertainty(g, keyset({"a"}), "nope"), LookupError);

  auto ret = fixtures::ranked({"a"});
  const double tr = topological_recall(g, ret, keyset({"c"}));
  CHECK(tr == doctest::Approx(1.0 / (1.0 + u)).epsilon(1e-15));
  CHECK(tr == doctest::Approx(0.3582).epsilon(1e-4));
  CHECK(miss_tr(g, ret, keyset({"c"})) == doctest::Approx(tr).epsilon(1e-15));

  CHECK(topological_recall(g, fixtures::ranked({"a", "b"}), keyset({"a", "b"})) == 1.0);
  CHECK(miss_tr(g, fixtures::ranked({"a", "b"}), keyset({"a", "b"})) == 0.0);
  CHECK(topological_recall(g, ret, keyset({"a", "z"})) == 0.5);
  CHECK_THROWS_AS(topological_recall(g, ret, KeySet{}), ValidationError);
}

TEST_CASE("path rules diverge on a low-degree detour") {
  // s-h-t through a hub h with many leaves, or s-p1-p2-p3-t through degree-2 nodes.
  fixtures::EdgeList edges{{"s", "h"}, {"h", "t"}, {"s", "p1"}, {"p1", "p2"}, {"p2", "p3"}, {"p3", "t"}};
  std::vector<NodeKey> keys{"s", "h", "t", "p1", "p2", "p3"};
  for (int i = 0; i < 30; ++i) {
    keys.push_back("leaf" + std::to_string(i));
    edges.emplace_back("h", keys.back());
  }
  auto g = fixtures::graph(keys, edges);
  const double via_hub = std::log(3.0) + std::log(33.0);
  const double detour = 4 * std::log(3.0);
  CHECK(uncertainty(g, keyset({"s"}), "t") == doctest::Approx(detour).epsilon(1e-15));
  CHECK(uncertainty(g, keyset({"s"}), "t", {View::Undirected, PathRule::HopShortest}) ==
        doctest::Approx(via_hub).epsilon(1e-15));
  CHECK(parse_path_rule("min-cost") == PathRule::MinCost);
  CHECK(parse_path_rule("hop-shortest") == PathRule::HopShortest);
  CHECK_THROWS_AS(parse_path_rule("bfs"), ValidationError);
}

TEST_CASE("uncertainty matches simple-path enumeration") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 300; ++trial) {
    auto rg = fixtures::random_graph(rng, 2 + rng() % 9, 0.2);
    oracles::Dense dense(rg.keys, rg.edges);
    auto seeds = fixtures::random_subset(rng, rg.keys, 0.25);
    if (seeds.empty()) seeds.push_back(rg.keys[rng() % rg.keys.size()]);
    const KeySet ret(seeds.begin(), seeds.end());
    auto all = uncertainties(rg.g, ret, rg.keys);
    auto hops = uncertainties(rg.g, ret, rg.keys, {View::Undirected, PathRule::HopShortest});
    for (std::size_t i = 0; i < rg.keys.size(); ++i) {
      const double expected = oracles::uncertainty_by_enumeration(dense, ret, rg.keys[i]);
      const double expected_hops = oracles::hop_uncertainty_by_enumeration(dense, ret, rg.keys[i]);
      if (std::isinf(expected)) {
        CHECK(std::isinf(all[i]));
        CHECK(std::isinf(hops[i]));
      } else {
        CHECK(std::abs(all[i] - expected) < 1e-9);
        CHECK(std::abs(hops[i] - expected_hops) < 1e-9);
        CHECK(all[i] <= hops[i] + 1e-12);
      }
      CHECK(all[i] == uncertainty(rg.g, ret, rg.keys[i]));
    }
  }
}

TEST_CASE("decomposition, bounds and monotonicity") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 1000; ++trial) {
    auto rg = fixtures::random_graph(rng, 2 + rng() % 30, 0.08);
    auto ret_keys = fixtures::random_subset(rng, rg.keys, 0.3);
    auto gold = fixtures::random_subset(rng, rg.keys, 0.2);
    if (gold.empty()) gold.push_back(rg.keys[0]);
    const KeySet oracle(gold.begin(), gold.end());
    const auto ret = fixtures::ranked(ret_keys);
    const double tr = topological_recall(rg.g, ret, oracle);
    const double recall = recall_uncapped(ret, oracle);
    const double miss = miss_tr(rg.g, ret, oracle);
    CHECK(std::abs(tr - (recall + miss)) < 1e-9);
    CHECK(miss >= 0.0);
    CHECK(miss <= 1.0 - recall + 1e-12);
    CHECK(tr <= 1.0);

    auto grown = ret_keys;
    for (const auto& k : rg.keys)
      if (std::find(grown.begin(), grown.end(), k) == grown.end()) {
        grown.push_back(k);
        break;
      }
    CHECK(topological_recall(rg.g, fixtures::ranked(grown), oracle) >= tr - 1e-12);

    const std::size_t k = 1 + rng() % 8;
    const auto top = ret.head(k);
    std::size_t hits = 0;
    for (const auto& e : top) hits += oracle.count(e.key);
    const double uncapped_top = static_cast<double>(hits) / static_cast<double>(oracle.size());
    if (!ret.empty()) {
      if (oracle.size() > k) CHECK(capped_recall_at_k(ret, oracle, k) >= uncapped_top);
      else CHECK(capped_recall_at_k(ret, oracle, k) == doctest::Approx(uncapped_top).epsilon(1e-15));
    }
  }
}

TEST_CASE("marginal recall gain") {
  auto gold = gold_names(5);
  const KeySet oracle(gold.begin(), gold.end());
  auto initial = filler_names(9);
  initial.push_back(gold[0]);
  auto final_list = initial;
  for (int i = 1; i < 4; ++i) final_list.push_back(gold[static_cast<std::size_t>(i)]);
  CHECK(marginal_recall_gain(fixtures::ranked(final_list), fixtures::ranked(initial), oracle, 100, 10) ==
        doctest::Approx(0.6).epsilon(1e-15));
  CHECK(marginal_recall_gain(fixtures::ranked(initial), fixtures::ranked(initial), oracle, 10, 10) == 0.0);
  CHECK(marginal_recall_gain(fixtures::ranked(gold), fixtures::ranked(filler_names(10)), oracle, 100, 10) == 1.0);
}

TEST_CASE("evaluate_query bundles the metrics") {
  auto g = fixtures::graph({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}});
  auto ret = fixtures::ranked({"b", "a"});
  auto m = evaluate_query(g, ret, fixtures::ranked({"a"}), keyset({"b", "d"}));
  CHECK(m.recall_at_k == 0.5);
  CHECK(m.recall_uncapped == 0.5);
  CHECK(std::abs(m.tr - (m.recall_uncapped + m.miss_tr)) < 1e-12);
  CHECK(m.recall_total == 0.5);
  CHECK(m.recall_vs == 0.0);
  CHECK(m.delta_r == 0.5);
  CHECK(m.ndcg_at_k == doctest::Approx(1.0 / (1.0 + 1.0 / std::log2(3.0))).epsilon(1e-15));
}

TEST_CASE("qrels parsing and validation") {
  auto q = parse_qrels("q1\ta\t1\nq1\tb\t0\nq2\tc\t2\n\nq1\td\t1\r\n");
  CHECK(q.size() == 2);
  CHECK(q.at("q1") == keyset({"a", "d"}));
  CHECK(q.at("q2") == keyset({"c"}));
  try {
    parse_qrels("q1\ta\t1\nq1 a 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_qrels("q1\ta\tx\n"), ParseError);

  auto g = fixtures::graph({"a", "c", "d"}, {});
  CHECK_NOTHROW(validate_qrels(q, g));
  CHECK_THROWS_AS(validate_qrels(parse_qrels("q1\tzz\t1\n"), g), ValidationError);
  CHECK(parse_qrels("q1\ta\t0\n").empty());
  CHECK_THROWS_AS(validate_qrels(Qrels{{"q1", KeySet{}}}, g), ValidationError);
}
