#include "twinsynth/config.hpp"

#include <cstdlib>

#include "twinsynth/corpus_io.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

std::string ResolvedConfig::str(const std::string& key) const {
  if (!has(key)) return {};
  const auto& v = view.at(key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

bool ResolvedConfig::has(const std::string& key) const { return view.contains(key) && !view.at(key).is_null(); }

namespace {

std::string env_name(const std::string& key) {
  std::string out = "TWINSYNTH_";
  for (char c : key) out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

nlohmann::json env_value(const std::string& raw) {
  try {
    auto j = nlohmann::json::parse(raw);
    if (!j.is_object() && !j.is_array()) return j;
  } catch (const nlohmann::json::parse_error&) {
  }
  return raw;
}

}  // namespace

std::string config_digest(const nlohmann::json& view, const std::set<std::string>& excluded) {
  nlohmann::json copy = view;
  for (const auto& k : excluded) copy.erase(k);
  return text::hex64(text::fnv1a64(copy.dump()));
}

ResolvedConfig resolve_config(const ConfigLayers& layers, const EnvLookup& env) {
  nlohmann::json view = layers.defaults.is_object() ? layers.defaults : nlohmann::json::object();

  auto path = layers.config_path;
  if (!path) path = env("TWINSYNTH_CONFIG");
  if (path && !path->empty()) {
    const auto file = read_json_file(*path);
    if (!file.is_object()) throw ConfigError("config file '" + *path + "' must hold a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) view[it.key()] = *it;
  }
  std::vector<std::string> keys;
  for (auto it = view.begin(); it != view.end(); ++it) keys.push_back(it.key());
  for (auto it = layers.flags.begin(); it != layers.flags.end(); ++it) keys.push_back(it.key());
  for (const auto& k : keys) {
    if (auto v = env(env_name(k))) view[k] = env_value(*v);
  }
  for (auto it = layers.flags.begin(); it != layers.flags.end(); ++it) view[it.key()] = *it;
  return {view, config_digest(view, layers.digest_excluded)};
}

}  // namespace twinsynth
