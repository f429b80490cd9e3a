#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "twinsynth/metrics.hpp"
#include "twinsynth/provider.hpp"

namespace twinsynth {

// Token embeddings for F_BERT.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<Vector> embed(const Tokens& tokens) = 0;
};

// Deterministic stand-in: equal tokens get equal vectors, components are
// non-negative and never all zero.
class HashEmbedder : public EmbeddingProvider {
 public:
  explicit HashEmbedder(std::size_t dim = 64, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}
  std::vector<Vector> embed(const Tokens& tokens) override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

struct HttpEmbedderConfig {
  std::string endpoint_url;
  std::string model_id;
  std::string api_key_env = "PROVIDER_API_KEY";
  std::chrono::seconds timeout{120};
};

// POST {model, input: [tokens]}; vectors are read from data[i].embedding.
class HttpEmbedder : public EmbeddingProvider {
 public:
  HttpEmbedder(HttpEmbedderConfig cfg, std::shared_ptr<HttpTransport> transport = default_http_transport());
  std::vector<Vector> embed(const Tokens& tokens) override;

 private:
  HttpEmbedderConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
};

std::unique_ptr<EmbeddingProvider> embedder_from_config(const nlohmann::json& cfg);

}  // namespace twinsynth
