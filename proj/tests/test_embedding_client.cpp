#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "cataudit/embedding_client.hpp"

using namespace cataudit;

namespace {

std::vector<double> fake_vector(const std::string& text) {
  double sum = 0;
  for (unsigned char c : text) sum += c;
  return {static_cast<double>(text.size()), sum, text.empty() ? 0.0 : static_cast<double>(text[0])};
}

// A local embedding service. Every request is recorded; `mode` picks the
// reply shape.
class StubServer {
 public:
  enum class Mode { Ok, ErrorField, Http500, RaggedDimension };

  StubServer() {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      const auto body = nlohmann::json::parse(req.body);
      batch_sizes_.push_back(body["inputs"].size());
      switch (mode_) {
        case Mode::ErrorField:
          res.set_content(R"({"error":"model 'nope' is not loaded"})", "application/json");
          return;
        case Mode::Http500:
          res.status = 500;
          res.set_content("backend exploded", "text/plain");
          return;
        default:
          break;
      }
      nlohmann::json out;
      out["vectors"] = nlohmann::json::array();
      for (const auto& s : body["inputs"]) {
        auto v = fake_vector(s.get<std::string>());
        if (mode_ == Mode::RaggedDimension && out["vectors"].size() == 1) v.push_back(0);
        out["vectors"].push_back(v);
      }
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  EmbeddingProviderConfig config(std::size_t batch = 16) const {
    EmbeddingProviderConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/embed";
    c.model_name = "stub";
    c.batch_size = batch;
    c.timeout_seconds = 5;
    c.max_retries = 0;
    return c;
  }

  Mode mode_ = Mode::Ok;
  std::atomic<int> requests_{0};
  std::vector<std::size_t> batch_sizes_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::vector<EmbeddingItem> items() {
  return {{"a", "Alpha", "first text", {"films"}},
          {"b", "Beta", "", {}},
          {"c", "Gamma", "first text", {"films", "serbian"}},
          {"d", "Delta", "another body", {}}};
}

}  // namespace

TEST(EmbeddingClient, EmptyInputMakesNoCall) {
  StubServer stub;
  const auto corpus = fetch_embeddings(stub.config(), {});
  EXPECT_EQ(corpus.size(), 0u);
  EXPECT_EQ(stub.requests_, 0);
}

TEST(EmbeddingClient, VectorsArriveInItemOrder) {
  StubServer stub;
  const auto corpus = fetch_embeddings(stub.config(), items());
  ASSERT_EQ(corpus.size(), 4u);
  EXPECT_EQ(corpus.dimension(), 3u);
  EXPECT_EQ(corpus.at("a").embedding, fake_vector("first text"));
  EXPECT_EQ(corpus.at("b").embedding, fake_vector("Beta"));  // no text: the title is embedded
  EXPECT_EQ(corpus.at("d").embedding, fake_vector("another body"));
  EXPECT_EQ(corpus.at("c").categories, (std::set<std::string>{"films", "serbian"}));
  EXPECT_EQ(corpus.at("a").text, std::optional<std::string>("first text"));
  EXPECT_FALSE(corpus.at("b").text.has_value());
}

TEST(EmbeddingClient, EqualTextsShareOneVector) {
  StubServer stub;
  const auto corpus = fetch_embeddings(stub.config(), items());
  EXPECT_EQ(corpus.at("a").embedding, corpus.at("c").embedding);
  EXPECT_EQ(stub.batch_sizes_, (std::vector<std::size_t>{3}));
}

TEST(EmbeddingClient, BatchingDoesNotChangeResult) {
  StubServer stub;
  const auto whole = fetch_embeddings(stub.config(16), items());
  for (std::size_t batch : {1u, 2u}) {
    stub.batch_sizes_.clear();
    const auto split = fetch_embeddings(stub.config(batch), items());
    for (const auto& a : whole.articles()) EXPECT_EQ(split.at(a.id).embedding, a.embedding);
    for (auto n : stub.batch_sizes_) EXPECT_LE(n, batch);
  }
  auto zero = stub.config(0);
  EXPECT_THROW(fetch_embeddings(zero, items()), Error);
}

TEST(EmbeddingClient, ProviderErrorsSurfaceVerbatim) {
  StubServer stub;
  stub.mode_ = StubServer::Mode::ErrorField;
  try {
    fetch_embeddings(stub.config(), items());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("model 'nope' is not loaded"), std::string::npos);
  }
  stub.mode_ = StubServer::Mode::Http500;
  try {
    fetch_embeddings(stub.config(), items());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("500"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("backend exploded"), std::string::npos);
  }
  EXPECT_EQ(stub.requests_, 2);
}

TEST(EmbeddingClient, DimensionMismatchIsRejected) {
  StubServer stub;
  stub.mode_ = StubServer::Mode::RaggedDimension;
  EXPECT_THROW(fetch_embeddings(stub.config(), items()), DimensionError);
}

TEST(EmbeddingClient, TransportFailureAfterRetries) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }  // closed again: nothing listens here now
  EmbeddingProviderConfig c;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/embed";
  c.timeout_seconds = 0.2;
  c.max_retries = 2;
  try {
    fetch_embeddings(c, items());
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("3 attempts"), std::string::npos);
  }
  c.endpoint = "ftp://127.0.0.1/embed";
  EXPECT_THROW(fetch_embeddings(c, items()), Error);
}
