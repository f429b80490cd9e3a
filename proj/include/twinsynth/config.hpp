#pragma once

// Layered run configuration: defaults < config file < TWINSYNTH_* environment
// variables < command-line flags. The digest identifies the resolved view.

#include <functional>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

namespace twinsynth {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

struct ResolvedConfig {
  nlohmann::json view;
  std::string digest;

  template <typename T>
  T get(const std::string& key) const {
    return view.at(key).get<T>();
  }
  std::string str(const std::string& key) const;  // "" when absent or null
  bool has(const std::string& key) const;         // present and not null
};

struct ConfigLayers {
  nlohmann::json defaults = nlohmann::json::object();
  std::optional<std::string> config_path;  // --config; falls back to TWINSYNTH_CONFIG
  nlohmann::json flags = nlohmann::json::object();  // only flags the user set
  std::set<std::string> digest_excluded;            // e.g. output paths
};

// Environment variables are TWINSYNTH_<KEY> with the key upper-cased and '-'
// mapped to '_'; only keys known from defaults or the file are consulted.
// Values are read as JSON when they parse, otherwise as strings.
ResolvedConfig resolve_config(const ConfigLayers& layers, const EnvLookup& env = process_env());

std::string config_digest(const nlohmann::json& view, const std::set<std::string>& excluded = {});

}  // namespace twinsynth
