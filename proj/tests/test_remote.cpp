#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "cml/provider_cache.hpp"
#include "cml/providers.hpp"

using namespace cml;

namespace {

// Tiny in-process endpoint speaking the embeddings/chat JSON shapes.
class MockServer {
 public:
  MockServer() {
    server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
      ++embed_requests;
      last_auth = req.get_header_value("Authorization");
      if (consume_failure(res)) return;
      auto body = nlohmann::json::parse(req.body);
      nlohmann::json data = nlohmann::json::array();
      for (const auto& text : body["input"]) {
        std::string s = text.get<std::string>();
        data.push_back({{"embedding", embedding_for(s)}});
      }
      res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      ++chat_requests;
      last_auth = req.get_header_value("Authorization");
      if (consume_failure(res)) return;
      auto body = nlohmann::json::parse(req.body);
      std::string prompt = body["messages"][1]["content"].get<std::string>();
      std::string reply = "mock reply";
      if (prompt.find("comma-separated list of lowercase keywords") != std::string::npos)
        reply = "Alpha, beta,  , gamma, beta";
      else if (prompt.find("exactly one word") != std::string::npos)
        reply = "Positive";
      else if (prompt.find("numbers of the lines") != std::string::npos)
        reply = "2. something the model echoed\n1\nnot-a-number\n99";
      res.set_content(
          nlohmann::json{{"choices", {{{"message", {{"content", reply}}}}}}}.dump(),
          "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  static std::vector<double> embedding_for(const std::string& s) {
    return {static_cast<double>(s.size()), s.empty() ? 0.0 : static_cast<double>(s[0]), 1.0};
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  ProviderConfig config() const {
    ProviderConfig cfg;
    cfg.endpoint = endpoint();
    cfg.model_name = "mock-model";
    cfg.api_key_env = "CML_TEST_KEY";
    cfg.timeout = std::chrono::milliseconds(5000);
    cfg.max_retries = 2;
    return cfg;
  }

  std::atomic<int> embed_requests{0};
  std::atomic<int> chat_requests{0};
  std::atomic<int> fail_next{0};
  int failure_status = 500;
  std::string last_auth;

 private:
  bool consume_failure(httplib::Response& res) {
    int pending = fail_next.load();
    while (pending > 0 && !fail_next.compare_exchange_weak(pending, pending - 1)) {
    }
    if (pending > 0) {
      res.status = failure_status;
      res.set_content("induced failure", "text/plain");
      return true;
    }
    return false;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

std::filesystem::path fresh_cache_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("remote embeddings: order, bearer token and dimension checks") {
  setenv("CML_TEST_KEY", "secret-token", 1);
  MockServer server;
  RemoteProvider provider(server.config());

  auto vectors = provider.embed({"alpha", "be"});
  REQUIRE(vectors.size() == 2);
  CHECK(vectors[0].values == MockServer::embedding_for("alpha"));
  CHECK(vectors[1].values == MockServer::embedding_for("be"));
  CHECK(provider.embedding_dimension() == 3);
  CHECK(server.last_auth == "Bearer secret-token");

  // blank texts resolve to zero vectors of the discovered dimension
  auto with_blank = provider.embed({"alpha", "  "});
  CHECK(with_blank[1].is_zero());
  CHECK(with_blank[1].dimension() == 3);

  CHECK_THROWS_AS(provider.embed({}), std::invalid_argument);
}

TEST_CASE("remote retries 429/5xx with backoff and gives up after max_retries") {
  MockServer server;

  SUBCASE("one 500 then success") {
    RemoteProvider provider(server.config());
    server.fail_next = 1;
    auto vectors = provider.embed({"x"});
    CHECK(vectors.size() == 1);
    CHECK(server.embed_requests.load() == 2);
  }
  SUBCASE("retries exhausted surfaces the status") {
    ProviderConfig cfg = server.config();
    cfg.max_retries = 1;
    RemoteProvider provider(cfg);
    server.fail_next = 10;
    try {
      provider.embed({"x"});
      FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
      CHECK(e.http_status() == 500);
    }
    CHECK(server.embed_requests.load() == 2);  // initial try + 1 retry
  }
  SUBCASE("4xx other than 429 is not retried") {
    ProviderConfig cfg = server.config();
    RemoteProvider provider(cfg);
    server.failure_status = 400;
    server.fail_next = 1;
    CHECK_THROWS_AS(provider.embed({"x"}), ProviderError);
    CHECK(server.embed_requests.load() == 1);
  }
}

TEST_CASE("remote transport failure surfaces as ProviderError") {
  ProviderConfig cfg;
  cfg.endpoint = "http://127.0.0.1:9";  // nothing listens here
  cfg.model_name = "mock-model";
  cfg.timeout = std::chrono::milliseconds(1500);
  RemoteProvider provider(cfg);
  CHECK_THROWS_AS(provider.embed({"x"}), ProviderError);
}

TEST_CASE("disk cache short-circuits repeated identical calls") {
  MockServer server;
  ProviderConfig cfg = server.config();
  cfg.cache_path = fresh_cache_dir("cml_cache_test");

  RemoteProvider provider(cfg);
  auto first = provider.embed({"cached text", "other"});
  int after_first = server.embed_requests.load();
  auto second = provider.embed({"cached text", "other"});
  CHECK(second == first);                               // byte-identical vectors
  CHECK(server.embed_requests.load() == after_first);   // zero extra requests

  // a fresh provider instance reuses the same directory
  RemoteProvider reopened(cfg);
  CHECK(reopened.embed({"cached text", "other"}) == first);
  CHECK(server.embed_requests.load() == after_first);

  // chat-backed capabilities cache too
  auto keywords_a = provider.extract_keywords("The canal at dusk");
  int chat_after = server.chat_requests.load();
  auto keywords_b = provider.extract_keywords("The canal at dusk");
  CHECK(keywords_a == keywords_b);
  CHECK(server.chat_requests.load() == chat_after);
}

TEST_CASE("remote extraction parses delimited replies defensively") {
  MockServer server;
  RemoteProvider provider(server.config());

  // "Alpha, beta,  , gamma, beta" -> lowercased, trimmed, deduplicated
  CHECK(provider.extract_keywords("whatever line") ==
        std::vector<std::string>{"alpha", "beta", "gamma"});

  CHECK(provider.classify_emotion("whatever line") == EmotionLabel::positive);

  std::vector<DialogueTurn> turns(3);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    turns[i].character = "A";
    turns[i].line = "line " + std::to_string(i);
  }
  // numbered and bare references both parse; junk and out-of-range drop
  auto hits = provider.detect_intentions(turns);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].turn_index == 0);
  CHECK(hits[1].turn_index == 1);
}

TEST_CASE("remote chat provider returns message content") {
  MockServer server;
  RemoteChatProvider chat(server.config());
  CHECK(chat.model_name() == "mock-model");
  CHECK(chat.complete("system", "user") == "mock reply");
}

TEST_CASE("remote provider accepts concurrent calls") {
  MockServer server;
  ProviderConfig cfg = server.config();
  cfg.cache_path = fresh_cache_dir("cml_cache_concurrent");
  cfg.max_in_flight = 4;
  RemoteProvider provider(cfg);

  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int round = 0; round < 5; ++round) {
        std::string text = "worker " + std::to_string(t % 3);  // overlapping cache keys
        auto vectors = provider.embed({text, "shared text"});
        if (vectors[0].values != MockServer::embedding_for(text)) ++mismatches;
        if (vectors[1].values != MockServer::embedding_for("shared text")) ++mismatches;
        if (provider.extract_keywords("whatever line").empty()) ++mismatches;
      }
    });
  }
  for (auto& thread : threads) thread.join();
  CHECK(mismatches.load() == 0);
}

TEST_CASE("provider cache survives collisions by storing the full key") {
  ProviderCache cache(fresh_cache_dir("cml_cache_unit"));
  CHECK(!cache.get("embed", "m", "text").has_value());
  cache.put("embed", "m", "text", "[1,2]");
  CHECK(cache.get("embed", "m", "text") == std::string("[1,2]"));
  CHECK(!cache.get("embed", "other-model", "text").has_value());
  CHECK(!cache.get("keywords", "m", "text").has_value());
}
