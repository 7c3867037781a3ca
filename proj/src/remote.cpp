#include "graphret/remote.hpp"

#include <httplib.h>
#include <json.hpp>

#include "graphret/error.hpp"

namespace graphret {

Endpoint Endpoint::parse(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint URL needs a scheme: " + url);
  if (url.compare(0, scheme_end, "http") != 0) throw ValidationError("only http endpoints are supported: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  e.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (e.origin.size() <= scheme_end + 3) throw ValidationError("endpoint URL has no host: " + url);
  return e;
}

namespace {

nlohmann::json post_json(const Endpoint& ep, const nlohmann::json& body, std::chrono::seconds timeout) {
  httplib::Client client(ep.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(ep.path, body.dump(), "application/json");
  if (!res) throw ModelError("request to " + ep.origin + ep.path + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ModelError("request to " + ep.origin + ep.path + " returned HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("malformed response from " + ep.origin + ep.path + ": " + e.what());
  }
}

std::vector<Vector> read_matrix(const nlohmann::json& reply, const char* field, std::size_t rows) {
  if (!reply.is_object() || !reply.contains(field) || !reply[field].is_array())
    throw ModelError(std::string("response is missing array field \"") + field + "\"");
  const auto& arr = reply[field];
  if (arr.size() != rows)
    throw ModelError("response has " + std::to_string(arr.size()) + " rows, expected " + std::to_string(rows));
  std::vector<Vector> out;
  out.reserve(rows);
  for (const auto& row : arr) {
    if (!row.is_array()) throw ModelError(std::string("\"") + field + "\" rows must be arrays");
    Vector v;
    v.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw ModelError(std::string("\"") + field + "\" entries must be numbers");
      v.push_back(x.get<double>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(const std::string& url, std::size_t batch_size, std::size_t dimension,
                               std::chrono::seconds timeout)
    : endpoint_(Endpoint::parse(url)), batch_size_(std::max<std::size_t>(1, batch_size)), d_(dimension),
      timeout_(timeout) {
  if (d_ == 0) {
    const std::string_view probe[] = {"dimension probe"};
    d_ = post(probe).front().size();
    if (d_ == 0) throw ModelError("remote embedder returned an empty vector");
  }
}

std::vector<Vector> RemoteEmbedder::post(std::span<const std::string_view> texts) const {
  nlohmann::json body;
  body["texts"] = nlohmann::json::array();
  for (auto t : texts) body["texts"].push_back(std::string(t));
  auto vecs = read_matrix(post_json(endpoint_, body, timeout_), "vectors", texts.size());
  for (const auto& v : vecs)
    if (d_ != 0 && v.size() != d_)
      throw DimensionError("remote embedder returned length " + std::to_string(v.size()) + ", expected " +
                           std::to_string(d_));
  return vecs;
}

Vector RemoteEmbedder::encode_query(std::string_view text) const { return post(std::span(&text, 1)).front(); }

Vector RemoteEmbedder::encode_node(std::string_view text) const { return post(std::span(&text, 1)).front(); }

std::vector<Vector> RemoteEmbedder::encode_nodes(std::span<const std::string_view> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (std::size_t lo = 0; lo < texts.size(); lo += batch_size_) {
    auto part = post(texts.subspan(lo, std::min(batch_size_, texts.size() - lo)));
    for (auto& v : part) out.push_back(std::move(v));
  }
  return out;
}

RemoteReranker::RemoteReranker(const std::string& url, AffineHead head, std::size_t batch_size,
                               std::chrono::seconds timeout)
    : endpoint_(Endpoint::parse(url)), head_(std::move(head)), batch_size_(std::max<std::size_t>(1, batch_size)),
      timeout_(timeout) {
  if (head_.depth() == 0) throw ValidationError("remote reranker needs a scoring head");
}

Vector RemoteReranker::extract_latent(std::string_view query, std::string_view content) const {
  auto m = extract_latents(query, std::span(&content, 1));
  return Vector(m.data(), m.data() + m.cols());
}

Eigen::MatrixXd RemoteReranker::extract_latents(std::string_view query,
                                                std::span<const std::string_view> contents) const {
  const auto d = static_cast<Eigen::Index>(latent_dimension());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(contents.size()), d);
  for (std::size_t lo = 0; lo < contents.size(); lo += batch_size_) {
    const auto part = contents.subspan(lo, std::min(batch_size_, contents.size() - lo));
    nlohmann::json body{{"query", std::string(query)}, {"documents", nlohmann::json::array()}, {"return_latents", true}};
    for (auto c : part) body["documents"].push_back(std::string(c));
    const auto rows = read_matrix(post_json(endpoint_, body, timeout_), "latents", part.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != d)
        throw DimensionError("remote reranker returned latent of length " + std::to_string(rows[i].size()) +
                             ", head expects " + std::to_string(d));
      for (Eigen::Index j = 0; j < d; ++j) out(static_cast<Eigen::Index>(lo + i), j) = rows[i][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

}  // namespace graphret
