#include "twinsynth/embedding.hpp"

#include <cstdlib>

#include "twinsynth/errors.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {

std::vector<Vector> HashEmbedder::embed(const Tokens& tokens) {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    Vector v(dim_);
    std::uint64_t h = text::fnv1a64(t, text::fnv1a64(std::to_string(seed_)));
    for (std::size_t k = 0; k < dim_; ++k) {
      h ^= h >> 33;
      h *= 0xff51afd7ed558ccdULL;
      h ^= h >> 33;
      v[k] = static_cast<double>(h % 1000) / 1000.0;
    }
    v[text::fnv1a64(t) % dim_] += 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig cfg, std::shared_ptr<HttpTransport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {
  if (cfg_.endpoint_url.empty()) throw ConfigError("embedding endpoint_url is empty");
}

std::vector<Vector> HttpEmbedder::embed(const Tokens& tokens) {
  if (tokens.empty()) return {};
  std::map<std::string, std::string> headers{{"Content-Type", "application/json"}};
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
    headers["Authorization"] = std::string("Bearer ") + key;
  }
  const nlohmann::json body{{"model", cfg_.model_id}, {"input", tokens}};
  const auto reply = transport_->post(cfg_.endpoint_url, headers, body.dump(), cfg_.timeout);
  if (reply.status == 401 || reply.status == 403) throw AuthError("embedding endpoint rejected credentials");
  if (reply.status != 200) {
    throw ProviderError("embedding endpoint returned HTTP " + std::to_string(reply.status));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply.body);
  } catch (const nlohmann::json::parse_error&) {
    throw ProviderError("embedding reply is not JSON");
  }
  if (!j.contains("data") || !j["data"].is_array() || j["data"].size() != tokens.size()) {
    throw ProviderError("embedding reply lacks one vector per token");
  }
  std::vector<Vector> out;
  for (const auto& d : j["data"]) {
    if (!d.contains("embedding") || !d["embedding"].is_array()) throw ProviderError("embedding entry without vector");
    out.push_back(d["embedding"].get<Vector>());
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> embedder_from_config(const nlohmann::json& cfg) {
  if (cfg.contains("endpoint_url")) {
    HttpEmbedderConfig c;
    c.endpoint_url = cfg.at("endpoint_url").get<std::string>();
    c.model_id = cfg.value("model_id", "");
    c.api_key_env = cfg.value("api_key_env", c.api_key_env);
    c.timeout = std::chrono::seconds(cfg.value("timeout_seconds", 120));
    return std::make_unique<HttpEmbedder>(c);
  }
  return std::make_unique<HashEmbedder>(cfg.value("dim", std::size_t{64}), cfg.value("seed", std::uint64_t{0}));
}

}  // namespace twinsynth
