#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "twinsynth/corpus.hpp"
#include "twinsynth/provider.hpp"

namespace twinsynth::testing {

inline std::filesystem::path source_dir() { return TWINSYNTH_SOURCE_DIR; }
inline std::filesystem::path templates_dir() { return source_dir() / "templates"; }

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("twinsynth-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline const std::vector<std::string>& twelve_topics() {
  static const std::vector<std::string> t{"relationship", "marriage",      "family",    "career",
                                          "emotion",      "self-growth",   "interpersonal", "education",
                                          "sexuality",    "behavior",      "mental-health", "parenting"};
  return t;
}

inline SingleTurnDialogue seed(const std::string& id, const std::string& topic) {
  return {id, CounselingTopic::from(topic), "Title " + id, "I have been struggling lately (" + id + ").",
          "It sounds hard. Let us look at it together.", Json::object()};
}

inline CounselingCase counseling_case(const std::string& id, const std::string& topic) {
  return {id, CounselingTopic::from(topic),
          make_transcript({{Role::client, "I feel stuck."},
                           {Role::counselor, "Tell me more about feeling stuck."},
                           {Role::client, "Nothing I do seems to matter."},
                           {Role::counselor, "That sounds exhausting."}}),
          true, Json::object()};
}

inline std::string persona_json() {
  return R"({"openness": {"level": "high", "rationale": "curious about options"},
             "conscientiousness": {"level": "medium", "rationale": "keeps trying"},
             "extraversion": {"level": "low", "rationale": "rarely talks to friends"},
             "agreeableness": {"level": "high", "rationale": "considerate of others"},
             "neuroticism": {"level": "high", "rationale": "worries constantly"}})";
}

inline std::string valid_transcript_text(int utterances = 6) {
  std::string s;
  for (int i = 0; i < utterances; ++i) {
    s += (i % 2 == 0 ? "client: client line " : "counselor: counselor line ") + std::to_string(i) + "\n";
  }
  return s;
}

// A mock script covering every pipeline stage.
inline MockBackend::Script pipeline_script(std::vector<ScriptEntry> synthesis = {{valid_transcript_text(), 200}}) {
  return {{"style", {{"Warm, short sentences; reflects feelings before asking questions.", 200}}},
          {"therapy_type", {{"Rational Emotive Behavior Therapy", 200}}},
          {"persona", {{persona_json(), 200}}},
          {"synthesis", std::move(synthesis)}};
}

inline GatewayOptions fast_options(int concurrency = 4) {
  GatewayOptions o;
  o.concurrency = concurrency;
  o.backoff_base = std::chrono::milliseconds(0);
  o.sleeper = [](std::chrono::milliseconds) {};
  return o;
}

inline std::shared_ptr<Gateway> mock_gateway(MockBackend::Script script, int concurrency = 4) {
  return std::make_shared<Gateway>(std::make_shared<MockBackend>(std::move(script)), fast_options(concurrency));
}

// Random valid dialogue: client first, counselor last, alternating.
inline MultiTurnDialogue random_dialogue(std::mt19937_64& rng, const std::string& id, const std::string& topic,
                                         std::size_t min_pairs = 1, std::size_t max_pairs = 8) {
  std::uniform_int_distribution<std::size_t> pairs(min_pairs, max_pairs);
  std::uniform_int_distribution<int> len(1, 30);
  const std::string alphabet = "abcdefgh";
  MultiTurnDialogue d{id, CounselingTopic::from(topic), {}, std::nullopt, Json::object()};
  const auto n = pairs(rng) * 2;
  for (std::size_t i = 0; i < n; ++i) {
    std::string content;
    const int l = len(rng);
    for (int k = 0; k < l; ++k) content.push_back(alphabet[static_cast<std::size_t>(rng() % alphabet.size())]);
    d.transcript.push_back({i % 2 == 0 ? Role::client : Role::counselor, content, i});
  }
  return d;
}

}  // namespace twinsynth::testing
