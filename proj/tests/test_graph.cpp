#include <doctest.h>
#include <zlib.h>

#include <filesystem>
#include <atomic>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "graphret/error.hpp"
#include "graphret/graph.hpp"
#include "graphret/io.hpp"

using namespace graphret;

namespace {

constexpr const char* kTwoNodes = R"({"key": "a", "content": "alpha"}
{"key": "b", "content": "beta"}
)";

CorpusGraph from_text(const std::string& nodes, const std::string& edges, LoadStats* stats = nullptr) {
  std::istringstream n(nodes), e(edges);
  return load_graph(n, e, stats);
}

}  // namespace

TEST_CASE("minimal graph has unit undirected degrees") {
  auto g = from_text(kTwoNodes, "a\tb\n");
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.degree("a", View::Undirected) == 1);
  CHECK(g.degree("b", View::Undirected) == 1);
  CHECK(g.node(g.id_of("a")).content == "alpha");
}

TEST_CASE("self-loops are dropped and counted") {
  LoadStats stats;
  auto g = from_text(kTwoNodes, "a\ta\na\tb\n", &stats);
  CHECK(stats.self_loops_dropped == 1);
  CHECK(g.edge_count() == 1);
  CHECK(g.degree("a", View::Undirected) == 1);
}

TEST_CASE("duplicate edges are deduplicated") {
  LoadStats stats;
  auto g = from_text(kTwoNodes, "a\tb\na\tb\nb\ta\n", &stats);
  CHECK(stats.duplicate_edges_dropped == 1);
  CHECK(g.edge_count() == 2);
  CHECK(g.degree("a", View::Undirected) == 1);
}

TEST_CASE("edges to unknown nodes are rejected with the offending keys") {
  try {
    from_text(kTwoNodes, "a\tc\nzz\tb\n");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(" c") != std::string::npos);
    CHECK(msg.find("zz") != std::string::npos);
  }
}

TEST_CASE("malformed lines report their line number") {
  SUBCASE("bad JSON") {
    try {
      from_text("{\"key\": \"a\", \"content\": \"x\"}\n{not json}\n", "");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("missing key field") {
    CHECK_THROWS_AS(from_text("{\"content\": \"x\"}\n", ""), ParseError);
  }
  SUBCASE("edge line with three columns") {
    try {
      from_text(kTwoNodes, "a\tb\na\tb\textra\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("edge line without tab") {
    CHECK_THROWS_AS(from_text(kTwoNodes, "a b\n"), ParseError);
  }
  SUBCASE("duplicate node keys") {
    CHECK_THROWS_AS(from_text("{\"key\":\"a\",\"content\":\"\"}\n{\"key\":\"a\",\"content\":\"\"}\n", ""),
                    ValidationError);
  }
}

TEST_CASE("empty content is allowed") {
  auto g = from_text("{\"key\": \"a\", \"content\": \"\"}\n", "");
  CHECK(g.node(0).content.empty());
}

TEST_CASE("neighbors under each view") {
  auto path = fixtures::graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  CHECK(path.neighbors("b", View::Undirected) == std::vector<NodeKey>{"a", "c"});

  auto iso = fixtures::graph({"a", "b", "z"}, {{"a", "b"}});
  CHECK(iso.neighbors("z", View::Undirected).empty());

  CHECK(iso.neighbors("a", View::Out) == std::vector<NodeKey>{"b"});
  CHECK(iso.neighbors("a", View::In).empty());
  CHECK(iso.neighbors("b", View::In) == std::vector<NodeKey>{"a"});
  CHECK_THROWS_AS(iso.neighbors("missing", View::Undirected), LookupError);
}

TEST_CASE("frontier examples") {
  auto path = fixtures::graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  CHECK(frontier(path, fixtures::ranked({"a"})) == std::vector<NodeKey>{"b"});
  CHECK(frontier(path, fixtures::ranked({"a", "b", "c"})).empty());

  auto tri = fixtures::graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}});
  CHECK(frontier(tri, fixtures::ranked({"a", "b"})) == std::vector<NodeKey>{"c"});

  CHECK_THROWS_AS(frontier(tri, fixtures::ranked({"nope"})), LookupError);
}

TEST_CASE("frontier is disjoint from the retrieved set and sorted") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto rg = fixtures::random_graph(rng, 3 + rng() % 20, 0.15);
    auto ret_keys = fixtures::random_subset(rng, rg.keys, 0.3);
    if (ret_keys.empty()) continue;
    auto ret = fixtures::ranked(ret_keys);
    auto f = frontier(rg.g, ret);
    CHECK(std::is_sorted(f.begin(), f.end()));
    for (const auto& k : f) {
      CHECK_FALSE(ret.contains(k));
      bool touches = false;
      for (const auto& r : ret_keys) {
        auto nb = rg.g.neighbors(r, View::Undirected);
        touches = touches || std::find(nb.begin(), nb.end(), k) != nb.end();
      }
      CHECK(touches);
    }
  }
}

TEST_CASE("degree equals the number of distinct neighbors in every view") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto rg = fixtures::random_graph(rng, 2 + rng() % 15, 0.2);
    for (const auto& k : rg.keys) {
      std::set<NodeKey> out, in;
      for (const auto& [s, d] : rg.edges) {
        if (s == k) out.insert(d);
        if (d == k) in.insert(s);
      }
      std::set<NodeKey> both = out;
      both.insert(in.begin(), in.end());
      CHECK(rg.g.degree(k, View::Out) == out.size());
      CHECK(rg.g.degree(k, View::In) == in.size());
      CHECK(rg.g.degree(k, View::Undirected) == both.size());
    }
  }
}

TEST_CASE("serialize then load round-trips") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto rg = fixtures::random_graph(rng, 1 + rng() % 12, 0.25);
    std::ostringstream nodes, edges;
    write_nodes(nodes, rg.g);
    write_edges(edges, rg.g);
    CHECK(from_text(nodes.str(), edges.str()) == rg.g);
  }
  // Content with characters that need JSON escaping.
  auto g = fixtures::graph_with_content({{"k1", "tab\there \"quoted\" \\ ünïcode\nline"}}, {});
  std::ostringstream nodes, edges;
  write_nodes(nodes, g);
  write_edges(edges, g);
  CHECK(from_text(nodes.str(), edges.str()) == g);
}

TEST_CASE("files load transparently whether plain or gzip") {
  const auto dir = std::filesystem::temp_directory_path() / "graphret_test_graph_io";
  std::filesystem::create_directories(dir);
  io::write_file(dir / "nodes.jsonl", kTwoNodes);
  const std::string edges = "a\tb\n";
  {
    gzFile gz = gzopen((dir / "edges.tsv.gz").string().c_str(), "wb");
    REQUIRE(gz != nullptr);
    gzwrite(gz, edges.data(), static_cast<unsigned>(edges.size()));
    gzclose(gz);
  }
  auto g = load_graph_files(dir / "nodes.jsonl", dir / "edges.tsv.gz");
  CHECK(g.edge_count() == 1);
  CHECK_THROWS_AS(load_graph_files(dir / "missing.jsonl", dir / "edges.tsv.gz"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("concurrent readers see the same answers") {
  std::mt19937_64 rng(9);
  auto rg = fixtures::random_graph(rng, 30, 0.1);
  auto ret = fixtures::ranked({rg.keys[0], rg.keys[3], rg.keys[7]});
  const auto expected = frontier(rg.g, ret);
  std::vector<std::thread> readers;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t)
    readers.emplace_back([&] {
      for (int i = 0; i < 200; ++i)
        if (frontier(rg.g, ret) != expected) ++mismatches;
    });
  for (auto& r : readers) r.join();
  CHECK(mismatches == 0);
}
