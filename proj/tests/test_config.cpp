#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"
#include "twinsynth/config.hpp"
#include "twinsynth/errors.hpp"

using namespace twinsynth;
namespace tt = twinsynth::testing;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

std::string write_config(const std::string& name, const nlohmann::json& j) {
  const auto path = (tt::temp_dir("config-" + name) / "cfg.json").string();
  std::ofstream(path) << j.dump();
  return path;
}

}  // namespace

TEST(Config, LayersApplyInOrder) {
  ConfigLayers layers;
  layers.defaults = {{"seed", 42}, {"attempts", 3}, {"tokenizer", "cjk_char"}, {"threshold", 7}};
  layers.config_path = write_config("order", {{"seed", 1}, {"attempts", 5}, {"tokenizer", "whitespace"}});
  layers.flags = {{"seed", 9}};
  const auto r = resolve_config(layers, fake_env({{"TWINSYNTH_SEED", "100"}, {"TWINSYNTH_ATTEMPTS", "4"}}));
  EXPECT_EQ(r.get<int>("seed"), 9);
  EXPECT_EQ(r.get<int>("attempts"), 4);
  EXPECT_EQ(r.str("tokenizer"), "whitespace");
  EXPECT_EQ(r.get<int>("threshold"), 7);
}

TEST(Config, EnvironmentNamesAndValues) {
  ConfigLayers layers;
  layers.defaults = {{"per-topic-test", 20}, {"fail-fast", false}, {"system-prompt", nullptr}};
  const auto r = resolve_config(layers, fake_env({{"TWINSYNTH_PER_TOPIC_TEST", "5"},
                                                  {"TWINSYNTH_FAIL_FAST", "true"},
                                                  {"TWINSYNTH_SYSTEM_PROMPT", "be kind"},
                                                  {"TWINSYNTH_UNKNOWN", "1"}}));
  EXPECT_EQ(r.get<int>("per-topic-test"), 5);
  EXPECT_TRUE(r.get<bool>("fail-fast"));
  EXPECT_EQ(r.str("system-prompt"), "be kind");
  EXPECT_FALSE(r.view.contains("unknown"));
  EXPECT_FALSE(r.has("missing"));
}

TEST(Config, ConfigPathFromEnvironment) {
  ConfigLayers layers;
  layers.defaults = {{"seed", 42}};
  const auto path = write_config("env", {{"seed", 7}});
  EXPECT_EQ(resolve_config(layers, fake_env({{"TWINSYNTH_CONFIG", path}})).get<int>("seed"), 7);
  layers.config_path = write_config("nonobject", nlohmann::json::array());
  EXPECT_THROW(resolve_config(layers, fake_env({})), ConfigError);
  layers.config_path = "/nonexistent/twinsynth.json";
  EXPECT_THROW(resolve_config(layers, fake_env({})), Error);
}

TEST(Config, DigestTracksSettingsButNotOutputs) {
  ConfigLayers a;
  a.defaults = {{"seed", 42}, {"out", "a.json"}};
  a.digest_excluded = {"out"};
  auto b = a;
  b.flags = {{"out", "b.json"}};
  auto c = a;
  c.flags = {{"seed", 43}};
  const auto env = fake_env({});
  EXPECT_EQ(resolve_config(a, env).digest, resolve_config(b, env).digest);
  EXPECT_NE(resolve_config(a, env).digest, resolve_config(c, env).digest);
  EXPECT_EQ(resolve_config(a, env).digest.size(), 16u);
  EXPECT_EQ(config_digest({{"x", 1}}), config_digest({{"x", 1}}));
}
