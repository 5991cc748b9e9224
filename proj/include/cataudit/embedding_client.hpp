#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "cataudit/corpus.hpp"
#include "cataudit/error.hpp"

namespace cataudit {

struct EmbeddingProviderConfig {
  std::string endpoint = "http://127.0.0.1:8080/embed";
  std::string model_name;
  std::size_t batch_size = 16;
  double timeout_seconds = 30.0;
  int max_retries = 3;
};

struct EmbeddingItem {
  std::string id;
  std::string title;
  std::string text;
  std::set<std::string> categories;
};

namespace detail {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline Endpoint split_endpoint(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw Error("embedding endpoint must be an http:// URL, got '" + url + "'");
  }
  auto slash = url.find('/', scheme.size());
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

inline std::string embedding_input(const EmbeddingItem& item) {
  return item.text.empty() ? item.title : item.text;
}

}  // namespace detail

/// Requests one vector per item from an HTTP embedding service.
///
/// Wire format: POST `{"model": ..., "inputs": [...]}` and expect
/// `{"vectors": [[...], ...]}` in input order. Identical inputs are sent once
/// per call and share a vector, so equal texts always map to byte-identical
/// embeddings regardless of how the items are batched. Transport failures are
/// retried up to `max_retries` times; an HTTP error or an `error` field in the
/// response is surfaced verbatim and not retried.
inline Corpus fetch_embeddings(const EmbeddingProviderConfig& cfg,
                               const std::vector<EmbeddingItem>& items) {
  if (items.empty()) return Corpus{};
  if (cfg.batch_size < 1) throw Error("embedding batch_size must be at least 1");

  std::vector<std::string> unique_inputs;
  std::map<std::string, std::size_t> slot;
  for (const auto& item : items) {
    auto input = detail::embedding_input(item);
    if (slot.emplace(input, unique_inputs.size()).second) unique_inputs.push_back(input);
  }

  const auto ep = detail::split_endpoint(cfg.endpoint);
  httplib::Client client(ep.origin);
  const auto timeout = std::chrono::duration<double>(cfg.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  std::vector<std::vector<double>> vectors;
  vectors.reserve(unique_inputs.size());
  std::size_t dimension = 0;

  for (std::size_t begin = 0; begin < unique_inputs.size(); begin += cfg.batch_size) {
    const std::size_t end = std::min(unique_inputs.size(), begin + cfg.batch_size);
    nlohmann::json request;
    request["model"] = cfg.model_name;
    request["inputs"] = std::vector<std::string>(unique_inputs.begin() + begin,
                                                 unique_inputs.begin() + end);
    const auto body = request.dump();

    httplib::Result res;
    for (int attempt = 0;; ++attempt) {
      res = client.Post(ep.path, body, "application/json");
      if (res) break;
      if (attempt >= cfg.max_retries) {
        throw TransportError("embedding request to " + cfg.endpoint + " failed after " +
                             std::to_string(attempt + 1) +
                             " attempts: " + httplib::to_string(res.error()));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
    }
    if (res->status != 200) {
      throw Error("embedding provider returned HTTP " + std::to_string(res->status) + ": " +
                  res->body);
    }

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw Error("embedding provider returned a non-JSON body: " + res->body);
    }
    if (reply.contains("error")) throw Error("embedding provider error: " + reply["error"].dump());
    if (!reply.contains("vectors") || !reply["vectors"].is_array()) {
      throw Error("embedding provider response lacks 'vectors': " + res->body);
    }
    const auto& got = reply["vectors"];
    if (got.size() != end - begin) {
      throw Error("embedding provider returned " + std::to_string(got.size()) +
                  " vectors for " + std::to_string(end - begin) + " inputs");
    }
    for (const auto& v : got) {
      auto vec = v.get<std::vector<double>>();
      if (dimension == 0) dimension = vec.size();
      if (vec.size() != dimension || dimension < 2) {
        throw DimensionError("embedding provider returned dimension " +
                             std::to_string(vec.size()) + ", expected " +
                             std::to_string(dimension));
      }
      vectors.push_back(std::move(vec));
    }
  }

  std::vector<EmbeddedArticle> articles;
  articles.reserve(items.size());
  for (const auto& item : items) {
    EmbeddedArticle a;
    a.id = item.id;
    a.title = item.title;
    a.embedding = vectors[slot.at(detail::embedding_input(item))];
    a.categories = item.categories;
    if (!item.text.empty()) a.text = item.text;
    articles.push_back(std::move(a));
  }
  return Corpus(dimension, std::move(articles));
}

}  // namespace cataudit
