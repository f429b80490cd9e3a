#pragma once

// Chat-completion access. A Gateway wraps one backend (HTTP endpoint or
// scripted mock) and adds retry with exponential backoff, an in-flight
// request limit and usage accounting. Nothing outside this module talks to
// the network.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "twinsynth/errors.hpp"

namespace twinsynth {

enum class MessageRole { system, user, assistant };
std::string_view to_string(MessageRole r);

struct ChatMessage {
  MessageRole role = MessageRole::user;
  std::string content;
};

// Defaults are the inference configuration used for every model in the
// reference evaluation.
struct Decoding {
  double temperature = 0.9;
  double top_p = 0.75;
  int top_k = 20;
  std::optional<int> max_tokens;

  void validate() const;  // throws InvariantError
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  Decoding decoding;
  std::string tag;  // pipeline stage label
  std::uint64_t seed = 0;

  void validate() const;
};

struct Usage {
  std::uint64_t prompt_units = 0;
  std::uint64_t completion_units = 0;

  Usage& operator+=(const Usage& o) {
    prompt_units += o.prompt_units;
    completion_units += o.completion_units;
    return *this;
  }
  bool operator==(const Usage&) const = default;
};

struct ChatResponse {
  std::string text;
  std::string provider_model_id;
  Usage usage;
};

// Raised by backends for failures worth retrying: transport faults, HTTP 5xx
// and 429.
class TransientFailure : public ProviderError {
 public:
  TransientFailure(const std::string& what, int status) : ProviderError(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse send(const ChatRequest& req) = 0;
  virtual std::string model_id() const = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct GatewayOptions {
  int attempt_cap = 3;
  std::chrono::milliseconds backoff_base{1000};
  double backoff_factor = 2.0;
  int concurrency = 4;
  Decoding decoding;
  Sleeper sleeper;  // defaults to std::this_thread::sleep_for
};

class Gateway {
 public:
  Gateway(std::shared_ptr<ChatBackend> backend, GatewayOptions opts = {});

  // Validates the request, waits for an in-flight slot, then sends with
  // retries. Throws TransportError after the attempt cap, AuthError,
  // RefusalError on an empty reply, or whatever non-retryable ProviderError
  // the backend raised.
  ChatResponse complete_chat(const ChatRequest& req);

  // Convenience: single user message with the gateway's default decoding.
  ChatResponse ask(const std::string& prompt, const std::string& tag, std::uint64_t seed,
                   const std::string& system_prompt = {});

  const Decoding& default_decoding() const { return opts_.decoding; }
  const GatewayOptions& options() const { return opts_; }
  std::string model_id() const { return backend_->model_id(); }

  Usage usage_totals() const;
  std::uint64_t completed_calls() const { return calls_.load(); }

 private:
  std::shared_ptr<ChatBackend> backend_;
  GatewayOptions opts_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  Usage usage_;
  std::atomic<std::uint64_t> calls_{0};
};

// ---- scripted mock ---------------------------------------------------------

struct ScriptEntry {
  std::string text;
  int status = 200;  // non-200 simulates an HTTP failure
};

// Answers by request tag. A tag may map to a sequence of entries: the k-th
// request carrying a given (tag, seed) pair receives entry k, and the last
// entry repeats. Tags missing from the script fall back to a seeded
// generator when one is configured, otherwise UnknownTagError.
class MockBackend : public ChatBackend {
 public:
  using Script = std::map<std::string, std::vector<ScriptEntry>>;

  explicit MockBackend(Script script, std::optional<std::uint64_t> fallback_seed = std::nullopt,
                       std::string model_id = "mock-provider");

  static std::shared_ptr<MockBackend> from_json(const nlohmann::json& j);

  ChatResponse send(const ChatRequest& req) override;
  std::string model_id() const override { return model_id_; }

 private:
  Script script_;
  std::optional<std::uint64_t> fallback_seed_;
  std::string model_id_;
  std::mutex mu_;
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> served_;
};

// Script map tag -> response, no fallback unless a seed is given.
std::shared_ptr<MockBackend> mock_provider(const std::map<std::string, std::string>& script,
                                           std::optional<std::uint64_t> fallback_seed = std::nullopt);

// ---- HTTP ------------------------------------------------------------------

struct HttpReply {
  int status = 0;
  std::string body;
};

// Raw POST. Implementations throw TransientFailure(status 0) when no HTTP
// exchange happened at all.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpReply post(const std::string& url, const std::map<std::string, std::string>& headers,
                         const std::string& body, std::chrono::seconds timeout) = 0;
};

std::shared_ptr<HttpTransport> default_http_transport();

struct HttpProviderConfig {
  std::string endpoint_url;
  std::string model_id;
  std::string api_key_env = "PROVIDER_API_KEY";
  bool send_top_k = true;
  std::chrono::seconds timeout{120};
};

// JSON chat-completion POST {model, messages, temperature, top_p, top_k,
// seed, max_tokens?}; the reply is read from choices[0].message.content.
class HttpBackend : public ChatBackend {
 public:
  HttpBackend(HttpProviderConfig cfg, std::shared_ptr<HttpTransport> transport = default_http_transport());

  ChatResponse send(const ChatRequest& req) override;
  std::string model_id() const override { return cfg_.model_id; }

  static nlohmann::json request_body(const ChatRequest& req, const std::string& model, bool with_top_k);
  static ChatResponse parse_reply(const std::string& body, const std::string& fallback_model);
  bool top_k_enabled() const { return top_k_enabled_.load(); }

 private:
  HttpProviderConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  std::atomic<bool> top_k_enabled_;
};

// Provider config file: either {endpoint_url, model_id, api_key_env?,
// send_top_k?, timeout_seconds?, ...} for HTTP or {script, fallback_seed?,
// model_id?} for the mock. Shared keys: decoding {temperature, top_p, top_k,
// max_tokens}, concurrency, attempt_cap, backoff_ms.
std::shared_ptr<Gateway> gateway_from_config(const nlohmann::json& cfg, Sleeper sleeper = {});
std::shared_ptr<Gateway> load_gateway(const std::string& path, Sleeper sleeper = {});

}  // namespace twinsynth
