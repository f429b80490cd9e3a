#include "twinsynth/provider.hpp"

#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "twinsynth/corpus_io.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {

std::string_view to_string(MessageRole r) {
  switch (r) {
    case MessageRole::system: return "system";
    case MessageRole::user: return "user";
    case MessageRole::assistant: break;
  }
  return "assistant";
}

void Decoding::validate() const {
  if (!(temperature >= 0.0)) throw InvariantError("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw InvariantError("top_p must lie in (0, 1]");
  if (top_k < 1) throw InvariantError("top_k must be >= 1");
  if (max_tokens && *max_tokens < 1) throw InvariantError("max_tokens must be >= 1");
}

void ChatRequest::validate() const {
  if (messages.empty()) throw InvariantError("chat request has no messages");
  decoding.validate();
}

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, GatewayOptions opts)
    : backend_(std::move(backend)), opts_(std::move(opts)) {
  if (!backend_) throw ConfigError("gateway needs a backend");
  if (opts_.attempt_cap < 1) throw ConfigError("attempt cap must be >= 1");
  if (opts_.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  opts_.decoding.validate();
  if (!opts_.sleeper) opts_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatResponse Gateway::complete_chat(const ChatRequest& req) {
  req.validate();
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < opts_.concurrency; });
    ++in_flight_;
  }
  struct Release {
    Gateway* g;
    ~Release() {
      {
        std::lock_guard lock(g->mu_);
        --g->in_flight_;
      }
      g->cv_.notify_one();
    }
  } release{this};

  std::vector<AttemptRecord> attempts;
  auto delay = opts_.backoff_base;
  for (int attempt = 1; attempt <= opts_.attempt_cap; ++attempt) {
    try {
      ChatResponse resp = backend_->send(req);
      {
        std::lock_guard lock(mu_);
        usage_ += resp.usage;
      }
      calls_.fetch_add(1);
      if (text::trim(resp.text).empty()) {
        throw RefusalError("provider returned empty content for tag '" + req.tag + "'");
      }
      return resp;
    } catch (const TransientFailure& f) {
      attempts.push_back({attempt, f.status(), f.what()});
      if (attempt == opts_.attempt_cap) break;
      spdlog::warn("attempt {}/{} for tag '{}' failed ({}), retrying in {} ms", attempt, opts_.attempt_cap,
                   req.tag, f.what(), delay.count());
      opts_.sleeper(delay);
      delay = std::chrono::milliseconds(
          static_cast<std::chrono::milliseconds::rep>(std::llround(delay.count() * opts_.backoff_factor)));
    }
  }
  throw TransportError("provider unreachable after " + std::to_string(attempts.size()) + " attempts (tag '" +
                           req.tag + "')",
                       std::move(attempts));
}

ChatResponse Gateway::ask(const std::string& prompt, const std::string& tag, std::uint64_t seed,
                          const std::string& system_prompt) {
  ChatRequest req;
  if (!system_prompt.empty()) req.messages.push_back({MessageRole::system, system_prompt});
  req.messages.push_back({MessageRole::user, prompt});
  req.decoding = opts_.decoding;
  req.tag = tag;
  req.seed = seed;
  return complete_chat(req);
}

Usage Gateway::usage_totals() const {
  std::lock_guard lock(mu_);
  return usage_;
}

// ---- mock ------------------------------------------------------------------

namespace {

std::uint64_t prompt_bytes(const ChatRequest& req) {
  std::uint64_t n = 0;
  for (const auto& m : req.messages) n += m.content.size();
  return n;
}

[[noreturn]] void raise_for_status(int status, const std::string& what) {
  if (status == 401 || status == 403) throw AuthError(what);
  if (status == 429 || status >= 500 || status == 0) throw TransientFailure(what, status);
  throw ProviderError(what);
}

}  // namespace

MockBackend::MockBackend(Script script, std::optional<std::uint64_t> fallback_seed, std::string model_id)
    : script_(std::move(script)), fallback_seed_(fallback_seed), model_id_(std::move(model_id)) {
  for (const auto& [tag, entries] : script_) {
    if (entries.empty()) throw ConfigError("mock script tag '" + tag + "' has no responses");
  }
}

std::shared_ptr<MockBackend> MockBackend::from_json(const nlohmann::json& j) {
  const nlohmann::json& body = j.contains("script") ? j.at("script") : j;
  if (!body.is_object()) throw ConfigError("mock script must be a JSON object");
  auto entry = [](const nlohmann::json& v) -> ScriptEntry {
    if (v.is_string()) return {v.get<std::string>(), 200};
    if (v.is_object()) return {v.value("text", ""), v.value("status", 200)};
    throw ConfigError("mock script entries must be strings or {text, status} objects");
  };
  Script script;
  for (auto it = body.begin(); it != body.end(); ++it) {
    if (!j.contains("script") && (it.key() == "fallback_seed" || it.key() == "model_id")) continue;
    std::vector<ScriptEntry> seq;
    if (it->is_array()) {
      for (const auto& v : *it) seq.push_back(entry(v));
    } else {
      seq.push_back(entry(*it));
    }
    script.emplace(it.key(), std::move(seq));
  }
  std::optional<std::uint64_t> fb;
  if (j.contains("fallback_seed") && !j.at("fallback_seed").is_null()) fb = j.at("fallback_seed").get<std::uint64_t>();
  return std::make_shared<MockBackend>(std::move(script), fb, j.value("model_id", "mock-provider"));
}

ChatResponse MockBackend::send(const ChatRequest& req) {
  ScriptEntry e;
  auto it = script_.find(req.tag);
  if (it != script_.end()) {
    std::size_t k;
    {
      std::lock_guard lock(mu_);
      k = served_[{req.tag, req.seed}]++;
    }
    e = it->second[std::min(k, it->second.size() - 1)];
  } else if (fallback_seed_) {
    std::uint64_t h = text::fnv1a64(req.tag, *fallback_seed_ ^ req.seed);
    for (const auto& m : req.messages) h = text::fnv1a64(m.content, h);
    e.text = "mock reply " + text::hex64(h);
  } else {
    throw UnknownTagError(req.tag);
  }
  if (e.status != 200) raise_for_status(e.status, "mock: scripted HTTP " + std::to_string(e.status));
  return {e.text, model_id_, {prompt_bytes(req), e.text.size()}};
}

std::shared_ptr<MockBackend> mock_provider(const std::map<std::string, std::string>& script,
                                           std::optional<std::uint64_t> fallback_seed) {
  MockBackend::Script s;
  for (const auto& [tag, text] : script) s[tag] = {ScriptEntry{text, 200}};
  return std::make_shared<MockBackend>(std::move(s), fallback_seed);
}

// ---- HTTP ------------------------------------------------------------------

HttpBackend::HttpBackend(HttpProviderConfig cfg, std::shared_ptr<HttpTransport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), top_k_enabled_(cfg_.send_top_k) {
  if (cfg_.endpoint_url.empty()) throw ConfigError("provider endpoint_url is empty");
  if (!transport_) throw ConfigError("no HTTP transport");
  if (!cfg_.send_top_k) spdlog::warn("provider '{}' does not accept top_k; it will be omitted", cfg_.model_id);
}

nlohmann::json HttpBackend::request_body(const ChatRequest& req, const std::string& model, bool with_top_k) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : req.messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  nlohmann::json body = {{"model", model},
                         {"messages", msgs},
                         {"temperature", req.decoding.temperature},
                         {"top_p", req.decoding.top_p},
                         {"seed", req.seed}};
  if (with_top_k) body["top_k"] = req.decoding.top_k;
  if (req.decoding.max_tokens) body["max_tokens"] = *req.decoding.max_tokens;
  return body;
}

ChatResponse HttpBackend::parse_reply(const std::string& body, const std::string& fallback_model) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw ProviderError("provider reply is not JSON");
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) throw ProviderError("provider reply has no choices");
  const auto& first = (*choices)[0];
  if (first.value("finish_reason", "") == "content_filter") throw RefusalError("provider blocked the content");
  const auto msg = first.find("message");
  if (msg == first.end() || !msg->contains("content") || !(*msg)["content"].is_string()) {
    throw RefusalError("provider reply carries no message content");
  }
  ChatResponse r;
  r.text = (*msg)["content"].get<std::string>();
  r.provider_model_id = j.value("model", fallback_model);
  if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
    r.usage.prompt_units = u->value("prompt_tokens", std::uint64_t{0});
    r.usage.completion_units = u->value("completion_tokens", std::uint64_t{0});
  }
  return r;
}

ChatResponse HttpBackend::send(const ChatRequest& req) {
  std::map<std::string, std::string> headers = {{"Content-Type", "application/json"}};
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
      headers["Authorization"] = std::string("Bearer ") + key;
    }
  }
  for (int pass = 0; pass < 2; ++pass) {
    const bool with_top_k = top_k_enabled_.load();
    const auto body = request_body(req, cfg_.model_id, with_top_k).dump();
    const HttpReply reply = transport_->post(cfg_.endpoint_url, headers, body, cfg_.timeout);
    if (reply.status == 200) return parse_reply(reply.body, cfg_.model_id);
    if (reply.status == 400 && with_top_k && reply.body.find("top_k") != std::string::npos) {
      spdlog::warn("provider '{}' rejected top_k; dropping it for subsequent requests", cfg_.model_id);
      top_k_enabled_.store(false);
      continue;
    }
    raise_for_status(reply.status, "provider answered HTTP " + std::to_string(reply.status));
  }
  throw ProviderError("provider rejected the request");
}

std::shared_ptr<Gateway> gateway_from_config(const nlohmann::json& cfg, Sleeper sleeper) {
  if (!cfg.is_object()) throw ConfigError("provider config must be a JSON object");
  GatewayOptions opts;
  opts.sleeper = std::move(sleeper);
  opts.attempt_cap = cfg.value("attempt_cap", opts.attempt_cap);
  opts.concurrency = cfg.value("concurrency", opts.concurrency);
  opts.backoff_base = std::chrono::milliseconds(cfg.value("backoff_ms", 1000));
  if (auto d = cfg.find("decoding"); d != cfg.end()) {
    opts.decoding.temperature = d->value("temperature", opts.decoding.temperature);
    opts.decoding.top_p = d->value("top_p", opts.decoding.top_p);
    opts.decoding.top_k = d->value("top_k", opts.decoding.top_k);
    if (d->contains("max_tokens") && !(*d)["max_tokens"].is_null()) opts.decoding.max_tokens = (*d)["max_tokens"].get<int>();
  }
  try {
    opts.decoding.validate();
  } catch (const InvariantError& e) {
    throw ConfigError(std::string("provider decoding: ") + e.what());
  }
  std::shared_ptr<ChatBackend> backend;
  if (cfg.contains("endpoint_url")) {
    HttpProviderConfig h;
    h.endpoint_url = cfg.at("endpoint_url").get<std::string>();
    h.model_id = cfg.value("model_id", "");
    h.api_key_env = cfg.value("api_key_env", h.api_key_env);
    h.send_top_k = cfg.value("send_top_k", true);
    h.timeout = std::chrono::seconds(cfg.value("timeout_seconds", 120));
    backend = std::make_shared<HttpBackend>(h);
  } else if (cfg.contains("script")) {
    backend = MockBackend::from_json(cfg);
  } else {
    throw ConfigError("provider config needs 'endpoint_url' or 'script'");
  }
  return std::make_shared<Gateway>(std::move(backend), std::move(opts));
}

std::shared_ptr<Gateway> load_gateway(const std::string& path, Sleeper sleeper) {
  return gateway_from_config(read_json_file(path), std::move(sleeper));
}

}  // namespace twinsynth
