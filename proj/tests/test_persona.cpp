#include <gtest/gtest.h>

#include "support.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/persona.hpp"

using namespace twinsynth;
namespace tt = twinsynth::testing;

namespace {

PromptTemplate persona_template() { return TemplateStore(tt::templates_dir()).get("persona"); }
PromptTemplate richness_template() { return TemplateStore(tt::templates_dir()).get("richness"); }

std::string profile_json(const std::array<std::string, 5>& levels) {
  const std::array<std::string, 5> keys{"openness", "conscientiousness", "extraversion", "agreeableness",
                                        "neuroticism"};
  Json j = Json::object();
  for (std::size_t i = 0; i < 5; ++i) j[keys[i]] = {{"level", levels[i]}, {"rationale", "because " + keys[i]}};
  return j.dump();
}

}  // namespace

TEST(ParsePersonality, BareAndFencedAgree) {
  const auto bare = parse_personality(tt::persona_json());
  const auto fenced = parse_personality("Here is the profile:\n```json\n" + tt::persona_json() + "\n```\nThanks.");
  EXPECT_EQ(bare, fenced);
  EXPECT_EQ(bare[Trait::openness].level, Level::high);
  EXPECT_EQ(bare[Trait::extraversion].rationale, "rarely talks to friends");
}

TEST(ParsePersonality, LevelsKeepOceanOrder) {
  const std::array<std::string, 5> levels{"high", "low", "medium", "high", "low"};
  const auto p = parse_personality(profile_json(levels));
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(to_string(p.traits[i].level), levels[i]);
    EXPECT_EQ(p.traits[i].rationale, "because " + std::string(to_string(kAllTraits[i])));
  }
}

TEST(ParsePersonality, CaseInsensitiveKeys) {
  const auto p = parse_personality(
      R"({"Openness": {"Level": "HIGH", "Rationale": "a"}, "CONSCIENTIOUSNESS": {"level": "low", "rationale": "b"},
          "extraversion": {"level": "medium", "rationale": "c"}, "agreeableness": {"level": "low", "rationale": "d"},
          "neuroticism": {"level": "high", "rationale": "e"}})");
  EXPECT_EQ(p[Trait::openness].level, Level::high);
  EXPECT_EQ(p[Trait::conscientiousness].rationale, "b");
}

TEST(ParsePersonality, RejectsDuplicatesAndMissingDimensions) {
  const std::string dup =
      R"({"openness": {"level": "high", "rationale": "a"}, "openness": {"level": "low", "rationale": "b"},
          "conscientiousness": {"level": "low", "rationale": "b"}, "extraversion": {"level": "medium", "rationale": "c"},
          "agreeableness": {"level": "low", "rationale": "d"}, "neuroticism": {"level": "high", "rationale": "e"}})";
  try {
    parse_personality(dup);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), "openness");
  }
  auto j = Json::parse(tt::persona_json());
  j.erase("agreeableness");
  try {
    parse_personality(j.dump());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), "agreeableness");
  }
  EXPECT_THROW(parse_personality("no json here"), ParseError);
  EXPECT_THROW(parse_personality(R"({"openness": )"), ParseError);
}

TEST(ParsePersonality, RejectsBadLevelsAndEmptyRationales) {
  auto j = Json::parse(tt::persona_json());
  j["openness"]["level"] = "very high";
  EXPECT_THROW(parse_personality(j.dump()), ParseError);
  j = Json::parse(tt::persona_json());
  j["neuroticism"]["rationale"] = "  ";
  EXPECT_THROW(parse_personality(j.dump()), ParseError);
}

TEST(ParsePersonality, IdempotentOnSerializedOutput) {
  std::mt19937_64 rng(3);
  const std::array<std::string, 3> names{"low", "medium", "high"};
  for (int round = 0; round < 50; ++round) {
    std::array<std::string, 5> levels;
    for (auto& l : levels) l = names[rng() % 3];
    const auto p = parse_personality(profile_json(levels));
    const auto again = parse_personality(serialize_personality(p));
    EXPECT_EQ(again, p);
    EXPECT_EQ(serialize_personality(again), serialize_personality(p));
  }
}

TEST(SimulatePersonality, ReturnsScriptedProfile) {
  Gateway gw(mock_provider({{"persona", tt::persona_json()}}), tt::fast_options());
  const auto r = simulate_personality(tt::seed("s1", "career"), gw, persona_template(), 7);
  EXPECT_EQ(r.raw_text, tt::persona_json());
  EXPECT_EQ(r.profile, parse_personality(tt::persona_json()));
}

TEST(SimulatePersonality, RetriesOnceThenGivesUp) {
  auto backend = std::make_shared<MockBackend>(
      MockBackend::Script{{"persona", {{"not json", 200}, {tt::persona_json(), 200}}}});
  Gateway gw(backend, tt::fast_options());
  EXPECT_NO_THROW(simulate_personality(tt::seed("s1", "career"), gw, persona_template(), 7, 2));
  EXPECT_EQ(gw.completed_calls(), 2u);

  auto four = Json::parse(tt::persona_json());
  four.erase("openness");
  Gateway bad(mock_provider({{"persona", four.dump()}}), tt::fast_options());
  try {
    simulate_personality(tt::seed("s1", "career"), bad, persona_template(), 7, 2);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), "openness");
  }
  EXPECT_EQ(bad.completed_calls(), 2u);
}

TEST(Richness, ParsesScores) {
  EXPECT_EQ(parse_richness_score("8"), 8);
  EXPECT_EQ(parse_richness_score("score: 10/10"), 10);
  EXPECT_EQ(parse_richness_score("I would give 3. Final score: 6"), 6);
  EXPECT_THROW(parse_richness_score("excellent"), ParseError);
  EXPECT_THROW(parse_richness_score("score: 11"), ParseError);
  EXPECT_THROW(parse_richness_score("-1"), ParseError);
  EXPECT_THROW(parse_richness_score("99999999999999999999"), ParseError);
}

TEST(Richness, AlwaysBoundedOrRejected) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const long v = static_cast<long>(rng() % 400) - 200;
    const std::string text = (rng() % 2 ? "score: " : "roughly ") + std::to_string(v);
    try {
      const int s = parse_richness_score(text);
      EXPECT_GE(s, 0);
      EXPECT_LE(s, 10);
      EXPECT_EQ(s, v);
    } catch (const ParseError&) {
      EXPECT_TRUE(v < 0 || v > 10) << text;
    }
  }
}

TEST(Richness, ScoresThroughTheGateway) {
  Gateway gw(mock_provider({{"richness", "Score: 9"}}), tt::fast_options());
  EXPECT_EQ(score_personality_richness(tt::seed("s1", "career"), gw, richness_template(), 1), 9);
}
