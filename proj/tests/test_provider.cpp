#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "support.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/parallel.hpp"
#include "twinsynth/provider.hpp"

using namespace twinsynth;
namespace tt = twinsynth::testing;

namespace {

ChatRequest request(const std::string& tag, std::uint64_t seed = 1, const std::string& prompt = "hi") {
  ChatRequest r;
  r.messages.push_back({MessageRole::user, prompt});
  r.tag = tag;
  r.seed = seed;
  return r;
}

}  // namespace

TEST(Decoding, DefaultsMatchTheReferenceInference) {
  const Decoding d;
  EXPECT_DOUBLE_EQ(d.temperature, 0.9);
  EXPECT_DOUBLE_EQ(d.top_p, 0.75);
  EXPECT_EQ(d.top_k, 20);
  EXPECT_FALSE(d.max_tokens);
}

TEST(Decoding, RejectsOutOfRangeValues) {
  Decoding d;
  d.top_p = 1.5;
  EXPECT_THROW(d.validate(), InvariantError);
  d = {};
  d.top_k = 0;
  EXPECT_THROW(d.validate(), InvariantError);
  EXPECT_THROW(ChatRequest{}.validate(), InvariantError);
}

TEST(Mock, AnswersByTagDeterministically) {
  Gateway gw(mock_provider({{"a", "x"}}), tt::fast_options());
  EXPECT_EQ(gw.complete_chat(request("a")).text, "x");
  EXPECT_EQ(gw.complete_chat(request("a")).text, "x");
  EXPECT_THROW(gw.complete_chat(request("b")), UnknownTagError);
}

TEST(Mock, SequencesAdvancePerTagAndSeed) {
  Gateway gw(std::make_shared<MockBackend>(MockBackend::Script{{"t", {{"one", 200}, {"two", 200}}}}), tt::fast_options());
  EXPECT_EQ(gw.complete_chat(request("t", 1)).text, "one");
  EXPECT_EQ(gw.complete_chat(request("t", 2)).text, "one");
  EXPECT_EQ(gw.complete_chat(request("t", 1)).text, "two");
  EXPECT_EQ(gw.complete_chat(request("t", 1)).text, "two");
}

TEST(Mock, FallbackGeneratorIsSeeded) {
  auto run = [](std::uint64_t fb) {
    Gateway gw(mock_provider({}, fb), tt::fast_options());
    std::vector<std::string> out;
    for (int i = 0; i < 3; ++i) out.push_back(gw.complete_chat(request("any", 5, "p" + std::to_string(i))).text);
    return out;
  };
  EXPECT_EQ(run(7), run(7));
  EXPECT_NE(run(7), run(8));
}

TEST(Mock, FromJsonAcceptsBareAndWrappedScripts) {
  auto bare = MockBackend::from_json(nlohmann::json::parse(R"({"a": "x", "b": ["1", {"text": "", "status": 503}]})"));
  EXPECT_EQ(bare->send(request("a")).text, "x");
  EXPECT_EQ(bare->send(request("b")).text, "1");
  EXPECT_THROW(bare->send(request("b")), TransientFailure);
  auto wrapped = MockBackend::from_json(nlohmann::json::parse(R"({"script": {"a": "y"}, "model_id": "m1"})"));
  EXPECT_EQ(wrapped->model_id(), "m1");
  EXPECT_EQ(wrapped->send(request("a")).text, "y");
}

TEST(Gateway, RetriesTransientFailuresWithExponentialBackoff) {
  std::vector<long> slept;
  auto opts = tt::fast_options();
  opts.backoff_base = std::chrono::milliseconds(100);
  opts.sleeper = [&](std::chrono::milliseconds d) { slept.push_back(d.count()); };
  Gateway gw(std::make_shared<MockBackend>(MockBackend::Script{{"t", {{"", 500}, {"", 502}, {"ok", 200}}}}), opts);
  EXPECT_EQ(gw.complete_chat(request("t")).text, "ok");
  EXPECT_EQ(slept, (std::vector<long>{100, 200}));
  EXPECT_EQ(gw.completed_calls(), 1u);
}

TEST(Gateway, GivesUpAtTheCapWithAttemptRecords) {
  Gateway gw(std::make_shared<MockBackend>(MockBackend::Script{{"t", {{"", 503}}}}), tt::fast_options());
  try {
    gw.complete_chat(request("t"));
    FAIL();
  } catch (const TransportError& e) {
    ASSERT_EQ(e.attempts().size(), 3u);
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(e.attempts()[static_cast<std::size_t>(i)].attempt, i + 1);
      EXPECT_EQ(e.attempts()[static_cast<std::size_t>(i)].status, 503);
    }
  }
}

TEST(Gateway, AuthAndRefusalAreNotRetried) {
  Gateway auth(std::make_shared<MockBackend>(MockBackend::Script{{"t", {{"", 401}, {"ok", 200}}}}), tt::fast_options());
  EXPECT_THROW(auth.complete_chat(request("t")), AuthError);
  Gateway empty(mock_provider({{"t", "  \n"}}), tt::fast_options());
  EXPECT_THROW(empty.complete_chat(request("t")), RefusalError);
}

TEST(Gateway, AccumulatesUsage) {
  Gateway gw(mock_provider({{"t", "abc"}}), tt::fast_options());
  gw.complete_chat(request("t", 1, "12345"));
  gw.complete_chat(request("t", 1, "12"));
  EXPECT_EQ(gw.usage_totals(), (Usage{7, 6}));
}

namespace {

class SlowBackend : public ChatBackend {
 public:
  ChatResponse send(const ChatRequest&) override {
    const int now = ++active;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --active;
    return {"ok", "slow", {}};
  }
  std::string model_id() const override { return "slow"; }
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
};

}  // namespace

TEST(Gateway, BoundsRequestsInFlight) {
  auto backend = std::make_shared<SlowBackend>();
  Gateway gw(backend, tt::fast_options(2));
  parallel_map(24, 8, [&](std::size_t) { return gw.complete_chat(request("t")).text; });
  EXPECT_LE(backend->peak.load(), 2);
  EXPECT_GE(backend->peak.load(), 1);
}

// ---- HTTP ------------------------------------------------------------------

namespace {

class FakeTransport : public HttpTransport {
 public:
  std::vector<HttpReply> replies;
  std::vector<nlohmann::json> bodies;
  std::vector<std::map<std::string, std::string>> headers;

  HttpReply post(const std::string&, const std::map<std::string, std::string>& h, const std::string& body,
                 std::chrono::seconds) override {
    bodies.push_back(nlohmann::json::parse(body));
    headers.push_back(h);
    const auto i = std::min(bodies.size() - 1, replies.size() - 1);
    return replies[i];
  }
};

std::string completion(const std::string& content) {
  return nlohmann::json{{"model", "served-model"},
                        {"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}},
                        {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 3}}}}
      .dump();
}

}  // namespace

TEST(Http, RequestCarriesDecodingAndSeed) {
  auto t = std::make_shared<FakeTransport>();
  t->replies = {{200, completion("hello")}};
  HttpBackend b({"http://x/v1/chat", "m", "TWINSYNTH_TEST_NO_KEY", true, std::chrono::seconds(5)}, t);
  auto req = request("t", 99);
  req.decoding.max_tokens = 64;
  const auto r = b.send(req);
  EXPECT_EQ(r.text, "hello");
  EXPECT_EQ(r.provider_model_id, "served-model");
  EXPECT_EQ(r.usage, (Usage{11, 3}));
  const auto& body = t->bodies.at(0);
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["seed"], 99);
  EXPECT_EQ(body["top_k"], 20);
  EXPECT_EQ(body["max_tokens"], 64);
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.9);
  EXPECT_EQ(body["messages"][0]["role"], "user");
}

TEST(Http, DropsTopKWhenTheEndpointRejectsIt) {
  auto t = std::make_shared<FakeTransport>();
  t->replies = {{400, R"({"error": "unknown parameter top_k"})"}, {200, completion("ok")}};
  HttpBackend b({"http://x/v1/chat", "m"}, t);
  EXPECT_EQ(b.send(request("t")).text, "ok");
  EXPECT_FALSE(b.top_k_enabled());
  EXPECT_TRUE(t->bodies[0].contains("top_k"));
  EXPECT_FALSE(t->bodies[1].contains("top_k"));
}

TEST(Http, MapsStatusesToErrors) {
  auto t = std::make_shared<FakeTransport>();
  HttpBackend b({"http://x/v1/chat", "m"}, t);
  t->replies = {{403, ""}};
  EXPECT_THROW(b.send(request("t")), AuthError);
  t->replies = {{429, ""}};
  EXPECT_THROW(b.send(request("t")), TransientFailure);
  t->replies = {{404, ""}};
  EXPECT_THROW(b.send(request("t")), ProviderError);
  EXPECT_THROW(HttpBackend::parse_reply(R"({"choices": [{"finish_reason": "content_filter", "message": {}}]})", "m"),
               RefusalError);
  EXPECT_THROW(HttpBackend::parse_reply("not json", "m"), ProviderError);
}

TEST(Http, SendsBearerKeyFromEnvironment) {
  ::setenv("TWINSYNTH_TEST_KEY", "sk-test", 1);
  auto t = std::make_shared<FakeTransport>();
  t->replies = {{200, completion("ok")}};
  HttpBackend b({"http://x/v1/chat", "m", "TWINSYNTH_TEST_KEY"}, t);
  b.send(request("t"));
  EXPECT_EQ(t->headers.at(0).at("Authorization"), "Bearer sk-test");
}

TEST(Http, LocalServerFailsTwiceThenAnswers) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = ++hits;
    if (n <= 2) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    res.set_content(completion("echo " + body["messages"][0]["content"].get<std::string>()), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto cfg = nlohmann::json{{"endpoint_url", "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"},
                            {"model_id", "local"},
                            {"backoff_ms", 1},
                            {"attempt_cap", 3}};
  auto gw = gateway_from_config(cfg, [](std::chrono::milliseconds) {});
  const auto r = gw->ask("ping", "t", 1);
  server.stop();
  th.join();
  EXPECT_EQ(r.text, "echo ping");
  EXPECT_EQ(hits.load(), 3);
}

TEST(Http, UnreachableEndpointIsATransportError) {
  auto cfg = nlohmann::json{{"endpoint_url", "http://127.0.0.1:1/v1/chat"}, {"model_id", "none"}, {"attempt_cap", 2},
                            {"timeout_seconds", 2}};
  auto gw = gateway_from_config(cfg, [](std::chrono::milliseconds) {});
  try {
    gw->ask("ping", "t", 1);
    FAIL();
  } catch (const TransportError& e) {
    ASSERT_EQ(e.attempts().size(), 2u);
    EXPECT_EQ(e.attempts()[0].status, 0);
  }
}

TEST(GatewayConfig, RejectsBadConfigs) {
  EXPECT_THROW(gateway_from_config(nlohmann::json::object()), ConfigError);
  EXPECT_THROW(gateway_from_config(nlohmann::json{{"script", {{"a", "x"}}}, {"decoding", {{"top_p", 0}}}}), ConfigError);
  auto gw = gateway_from_config(nlohmann::json{{"script", {{"a", "x"}}}, {"concurrency", 2}, {"decoding", {{"top_k", 5}}}});
  EXPECT_EQ(gw->options().concurrency, 2);
  EXPECT_EQ(gw->default_decoding().top_k, 5);
}
