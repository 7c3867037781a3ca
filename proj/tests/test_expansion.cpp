#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "graphret/embedding.hpp"
#include "graphret/error.hpp"
#include "graphret/stex.hpp"
#include "oracles.hpp"

using namespace graphret;

namespace {

struct Expected {
  std::string key;
  double i_struct;
  double i_sim;
};

// Structural and similarity terms from the dense adjacency matrix.
std::vector<Expected> stex_oracle(const oracles::Dense& dense, const std::vector<std::string>& ret,
                                  const EmbeddingIndex& index, const Vector& q) {
  const std::set<std::string> in_ret(ret.begin(), ret.end());
  const double r_max = static_cast<double>(ret.size());
  std::vector<Expected> out;
  for (std::size_t n = 0; n < dense.keys.size(); ++n) {
    if (in_ret.count(dense.keys[n])) continue;
    std::size_t adjacent = 0, best = 0;
    for (std::size_t r = ret.size(); r-- > 0;)
      if (dense.linked(n, dense.index(ret[r]))) ++adjacent, best = r + 1;
    if (adjacent == 0) continue;
    double i_struct = 0.0;
    if (r_max > 1) i_struct += 1.0 - (static_cast<double>(best) - 1.0) / (r_max - 1.0);
    const double c_max = std::min(static_cast<double>(dense.undirected_degree(n)), r_max);
    if (c_max > 1) i_struct += (static_cast<double>(adjacent) - 1.0) / (c_max - 1.0);
    double sim = 0.0;
    auto v = index.vector(dense.keys[n]);
    for (std::size_t j = 0; j < q.size(); ++j) sim += q[j] * v[j];
    out.push_back({dense.keys[n], i_struct, sim});
  }
  return out;
}

struct Instance {
  fixtures::RandomGraph rg;
  EmbeddingIndex index;
  std::vector<std::string> ret;
  Vector q;
};

Instance random_instance(std::mt19937_64& rng) {
  Instance inst;
  inst.rg = fixtures::random_graph(rng, 4 + rng() % 20, 0.15);
  std::vector<NodeRecord> nodes;
  for (const auto& k : inst.rg.keys) nodes.push_back({k, fixtures::random_text(rng, 5)});
  inst.rg.g = fixtures::graph_with_content(nodes, inst.rg.edges);
  inst.index = build_index(inst.rg.g, HashEmbedder(32));
  inst.ret = fixtures::random_subset(rng, inst.rg.keys, 0.3);
  if (inst.ret.empty()) inst.ret.push_back(inst.rg.keys[0]);
  inst.q = prepare_query(hash_embed(fixtures::random_text(rng, 4), 32), inst.index);
  return inst;
}

}  // namespace

TEST_CASE("hand trace with two retrieved neighbors") {
  // n is adjacent to both retrieved nodes and to x, so deg(n) = 3.
  auto g = fixtures::graph({"a", "b", "n", "x"}, {{"a", "n"}, {"n", "b"}, {"n", "x"}});
  auto index = build_index(g, HashEmbedder(16));
  auto q = prepare_query(hash_embed("text of n", 16), index);
  auto scores = stex_scores(q, index, g, fixtures::ranked({"a", "b"}), 1.0);
  REQUIRE(scores.size() == 1);
  CHECK(scores[0].key == "n");
  CHECK(scores[0].rank_term == 1.0);
  CHECK(scores[0].bridging_term == 1.0);
  CHECK(scores[0].i_struct == 2.0);
  CHECK(scores[0].i_sim == dot(q, index.vector("n")));
  CHECK(scores[0].total == scores[0].i_sim + 2.0);
}

TEST_CASE("bottom-ranked neighbor only") {
  // c hangs off the last of four retrieved nodes and has two outside neighbors.
  auto g = fixtures::graph({"a", "b", "c", "d", "r1", "r2", "r3", "r4"},
                           {{"r1", "r2"}, {"r2", "r3"}, {"r3", "r4"}, {"r4", "c"}, {"c", "a"}, {"c", "b"}, {"d", "r1"}});
  auto index = build_index(g, HashEmbedder(16));
  auto q = prepare_query(hash_embed("query", 16), index);
  auto scores = stex_scores(q, index, g, fixtures::ranked({"r1", "r2", "r3", "r4"}), 1.0);
  REQUIRE(scores.size() == 2);
  for (const auto& s : scores) {
    if (s.key == "c") {
      CHECK(s.rank_term == 0.0);
      CHECK(s.bridging_term == 0.0);
    } else {
      CHECK(s.key == "d");
      CHECK(s.rank_term == 1.0);
    }
  }
}

TEST_CASE("single retrieved node gives similarity-only order") {
  auto g = fixtures::graph({"a", "b", "c", "d"}, {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}});
  auto index = build_index(g, HashEmbedder(16));
  auto q = prepare_query(hash_embed("text of c", 16), index);
  auto scores = stex_scores(q, index, g, fixtures::ranked({"a"}), 5.0);
  REQUIRE(scores.size() == 3);
  for (const auto& s : scores) CHECK(s.i_struct == 0.0);
  for (std::size_t i = 1; i < scores.size(); ++i) CHECK(scores[i - 1].i_sim >= scores[i].i_sim);
}

TEST_CASE("empty frontier and missing vectors") {
  auto g = fixtures::graph({"a", "b", "c"}, {{"a", "b"}});
  auto index = build_index(g, HashEmbedder(16));
  Vector q(16, 0.0);
  CHECK(stex(q, index, g, fixtures::ranked({"a", "b"}), 1.0).empty());
  CHECK(stex(q, index, g, fixtures::ranked({"c"}), 1.0).empty());

  auto partial = EmbeddingIndex::from_rows(16, {{"a", Vector(16, 0.25)}}, true);
  CHECK_THROWS_AS(stex(q, partial, g, fixtures::ranked({"a"}), 1.0), LookupError);
  CHECK_THROWS_AS(stex(q, index, g, RankedList{}, 1.0), ValidationError);
  CHECK_THROWS_AS(stex(q, index, g, fixtures::ranked({"a"}), -1.0), ValidationError);
}

TEST_CASE("scores match the dense oracle") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = random_instance(rng);
    oracles::Dense dense(inst.rg.keys, inst.rg.edges);
    auto expected = stex_oracle(dense, inst.ret, inst.index, inst.q);
    auto got = stex_scores(inst.q, inst.index, inst.rg.g, fixtures::ranked(inst.ret), 1.0);
    REQUIRE(got.size() == expected.size());
    for (const auto& e : expected) {
      auto it = std::find_if(got.begin(), got.end(), [&](const StexScore& s) { return s.key == e.key; });
      REQUIRE(it != got.end());
      CHECK(std::abs(it->i_struct - e.i_struct) < 1e-12);
      CHECK(std::abs(it->i_sim - e.i_sim) < 1e-12);
      CHECK(it->i_struct >= 0.0);
      CHECK(it->i_struct <= 2.0);
      CHECK(std::abs(it->total - (it->i_sim + it->i_struct)) < 1e-12);
    }
  }
}

TEST_CASE("beta zero orders the frontier by dot product") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng);
    auto front = frontier(inst.rg.g, fixtures::ranked(inst.ret));
    std::vector<std::pair<double, std::string>> expected;
    for (const auto& k : front) expected.emplace_back(-dot(inst.q, inst.index.vector(k)), k);
    std::sort(expected.begin(), expected.end());
    auto got = stex(inst.q, inst.index, inst.rg.g, fixtures::ranked(inst.ret), 0.0);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].key == expected[i].second);
  }
}

TEST_CASE("large beta sorts by structure first") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng);
    oracles::Dense dense(inst.rg.keys, inst.rg.edges);
    auto expected = stex_oracle(dense, inst.ret, inst.index, inst.q);
    auto got = stex(inst.q, inst.index, inst.rg.g, fixtures::ranked(inst.ret), 1e9);
    REQUIRE(got.size() == expected.size());
    auto lookup = [&](const std::string& k) {
      return *std::find_if(expected.begin(), expected.end(), [&](const Expected& e) { return e.key == k; });
    };
    // Totals near 1e9 resolve similarity only to about 1e-6.
    for (std::size_t i = 1; i < got.size(); ++i) {
      const auto hi = lookup(got[i - 1].key), lo = lookup(got[i].key);
      CHECK(hi.i_struct > lo.i_struct - 1e-12);
      if (std::abs(hi.i_struct - lo.i_struct) < 1e-12) CHECK(hi.i_sim > lo.i_sim - 1e-6);
    }

    std::set<std::string> a, b;
    for (const auto& s : got) a.insert(s.key);
    for (const auto& s : stex(inst.q, inst.index, inst.rg.g, fixtures::ranked(inst.ret), 0.37)) b.insert(s.key);
    CHECK(a == b);
  }
}

TEST_CASE("output is the frontier and excludes retrieved nodes") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng);
    auto ret = fixtures::ranked(inst.ret);
    auto got = stex(inst.q, inst.index, inst.rg.g, ret, 1.0).keys();
    std::sort(got.begin(), got.end());
    CHECK(got == frontier(inst.rg.g, ret));
    for (const auto& k : got) CHECK_FALSE(ret.contains(k));
  }
}

TEST_CASE("directed view reads retrieved neighbors along incoming edges") {
  // a -> n and b -> n; n -> x. Under Out, n is in the frontier and both retrieved nodes point at it.
  auto g = fixtures::graph({"a", "b", "n", "x"}, {{"a", "n"}, {"b", "n"}, {"n", "x"}});
  auto index = build_index(g, HashEmbedder(16));
  Vector q(16, 0.0);
  auto out = stex_scores(q, index, g, fixtures::ranked({"a", "b"}), 1.0, View::Out);
  REQUIRE(out.size() == 1);
  CHECK(out[0].key == "n");
  CHECK(out[0].rank_term == 1.0);
  CHECK(out[0].bridging_term == 1.0);
  CHECK(stex_scores(q, index, g, fixtures::ranked({"a", "b"}), 1.0, View::In).empty());
}
