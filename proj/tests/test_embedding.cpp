#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>
#include <thread>

#include "fixtures.hpp"
#include "graphret/embedding.hpp"
#include "graphret/error.hpp"
#include "graphret/remote.hpp"
#include "oracles.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace graphret;
namespace fs = std::filesystem;

namespace {

class CountingEmbedder final : public Embedder {
 public:
  explicit CountingEmbedder(std::size_t d) : inner_(d) {}
  std::size_t dimension() const override { return inner_.dimension(); }
  Vector encode_query(std::string_view t) const override { return inner_.encode_query(t); }
  Vector encode_node(std::string_view t) const override {
    ++calls;
    return inner_.encode_node(t);
  }
  mutable std::atomic<int> calls{0};

 private:
  HashEmbedder inner_;
};

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("graphret_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto p = dir / name;
  fs::remove(p);
  return p;
}

std::string pair_text(std::size_t pair, char side) {
  std::string s;
  for (int j = 0; j < 6; ++j) s += std::string(j ? " " : "") + side + std::to_string(pair) + "t" + std::to_string(j);
  return s;
}

}  // namespace

TEST_CASE("hash_embed basics") {
  CHECK(hash_embed("Graph retrieval, again!", 256) == hash_embed("Graph retrieval, again!", 256));
  CHECK(hash_embed("GRAPH", 64) == hash_embed("graph", 64));
  auto zero = hash_embed("", 256);
  REQUIRE(zero.size() == 256);
  for (double x : zero) CHECK(x == 0.0);
  for (double x : hash_embed("  ,;- ", 32)) CHECK(x == 0.0);
  CHECK(l2_norm(hash_embed("one two three", 16)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(hash_embed("x", 7), ValidationError);
  CHECK(tokenize("Hello, World-42 caf\xc3\xa9") == std::vector<std::string>{"hello", "world", "42", "caf\xc3\xa9"});
}

TEST_CASE("texts without shared tokens are nearly orthogonal") {
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const double s = std::abs(dot(hash_embed(pair_text(i, 'a'), 256), hash_embed(pair_text(i, 'b'), 256)));
    worst = std::max(worst, s);
  }
  // Frozen from the first computation over this corpus.
  CHECK(worst == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(worst < 0.3);
}

TEST_CASE("build_index and the vector cache") {
  auto g = fixtures::graph({"a", "b", "c"}, {{"a", "b"}});
  CountingEmbedder emb(32);
  auto path = temp_file("cache.gsix");
  IndexOptions opts;
  opts.cache_path = path;

  auto first = build_index(g, emb, opts);
  CHECK(first.size() == 3);
  CHECK(first.dimension() == 32);
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first.row(i).size() == 32);
    CHECK(std::abs(l2_norm(first.row(i)) - 1.0) < 1e-9);
  }
  CHECK(emb.calls == 3);
  CHECK(fs::exists(path));

  auto second = build_index(g, emb, opts);
  CHECK(emb.calls == 3);
  CHECK(second == first);

  CountingEmbedder wider(64);
  CHECK_THROWS_AS(build_index(g, wider, opts), CacheError);

  auto other = fixtures::graph({"a", "b", "d"}, {});
  CHECK_THROWS_AS(build_index(other, emb, opts), CacheError);

  {
    std::ofstream junk(path, std::ios::binary | std::ios::trunc);
    junk << "not a cache";
  }
  CHECK_THROWS_AS(read_vector_cache(path, true), CacheError);

  IndexOptions threaded;
  threaded.threads = 4;
  threaded.batch_size = 1;
  CHECK(build_index(g, emb, threaded) == first);
  CHECK_THROWS_AS(first.vector("zz"), LookupError);
}

TEST_CASE("vector_search examples") {
  auto index = EmbeddingIndex::from_rows(2, {{"a", {1, 0}}, {"b", {0, 1}}}, true);
  auto r = vector_search(std::vector<double>{1, 0}, index, 1);
  REQUIRE(r.size() == 1);
  CHECK(r[0].key == "a");

  auto four = EmbeddingIndex::from_rows(2, {{"d", {1, 0}}, {"c", {0, 1}}, {"b", {1, 0}}, {"a", {-1, 0}}}, true);
  auto all = vector_search(std::vector<double>{1, 0}, four, 10);
  CHECK(all.keys() == std::vector<std::string>{"b", "d", "c", "a"});

  CHECK_THROWS_AS(vector_search(std::vector<double>{1, 0, 0}, four, 1), DimensionError);
  CHECK_THROWS_AS(vector_search(std::vector<double>{1, 0}, four, 0), ValidationError);
}

TEST_CASE("vector_search matches an exhaustive scan") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 16;
    std::vector<std::pair<NodeKey, Vector>> rows;
    for (std::size_t i = 0; i < 50; ++i) {
      Vector v(d);
      for (double& x : v) x = normal(rng);
      rows.emplace_back(fixtures::node_name(i), v);
    }
    auto index = EmbeddingIndex::from_rows(d, rows, true);
    Vector q(d);
    for (double& x : q) x = normal(rng);
    q = prepare_query(q, index);

    std::vector<double> scores;
    for (std::size_t i = 0; i < index.size(); ++i) scores.push_back(dot(q, index.row(i)));
    std::vector<std::string> expected;
    for (auto i : oracles::top_k_by_scan(scores, 7)) expected.push_back(index.key(i));

    auto got = vector_search(q, index, 7);
    CHECK(got.keys() == expected);
    for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1].score >= got[i].score);
    for (std::size_t i = 0; i < index.size(); ++i)
      if (!got.contains(index.key(i))) CHECK(scores[i] <= got[got.size() - 1].score);
  }
}

TEST_CASE("raw vectors when normalization is off") {
  auto index = EmbeddingIndex::from_rows(2, {{"a", {3, 0}}, {"b", {0, 1}}}, false);
  CHECK(index.vector("a")[0] == 3.0);
  CHECK(vector_search(std::vector<double>{1, 1}, index, 2)[0].score == 3.0);
}

TEST_CASE("remote embedder against a local server") {
  std::atomic<int> requests{0};
  httplib::Server server;
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    auto body = nlohmann::json::parse(req.body);
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& t : body.at("texts")) {
      if (t.get<std::string>().find("poison") != std::string::npos) {
        res.status = 500;
        return;
      }
      vectors.push_back(hash_embed(t.get<std::string>(), 16));
    }
    res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/embed";
  RemoteEmbedder remote(url, 2);
  CHECK(remote.dimension() == 16);
  CHECK(remote.encode_query("alpha beta") == hash_embed("alpha beta", 16));

  auto g = fixtures::graph_with_content({{"a", "one"}, {"b", "two"}, {"c", "three"}}, {});
  requests = 0;
  auto index = build_index(g, remote);
  CHECK(index == build_index(g, HashEmbedder(16)));
  CHECK(requests == 2);

  auto bad = fixtures::graph_with_content({{"a", "one"}, {"b", "poison pill"}}, {});
  try {
    build_index(bad, remote);
    FAIL("expected a model error");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("node b:") != std::string::npos);
  }

  server.stop();
  worker.join();
  CHECK_THROWS_AS(Endpoint::parse("https://example.org/x"), ValidationError);
}
