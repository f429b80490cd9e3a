#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "twinsynth/corpus_io.hpp"
#include "twinsynth/errors.hpp"

using namespace twinsynth;
namespace tt = twinsynth::testing;

TEST(Role, RoundTripsAndRejectsUnknown) {
  EXPECT_EQ(role_from_string(to_string(Role::client)), Role::client);
  EXPECT_EQ(role_from_string(to_string(Role::counselor)), Role::counselor);
  EXPECT_THROW(role_from_string("narrator"), ParseError);
}

TEST(Topic, NormalizesIdKeepsDisplayName) {
  const auto t = CounselingTopic::from(" Mental  Health ");
  EXPECT_EQ(t.id, "mental health");
  EXPECT_EQ(t, CounselingTopic::from("mental health"));
}

TEST(TopicRegistry, ShippedFileHasTwelveTopics) {
  const auto reg = TopicRegistry::load((tt::source_dir() / "data" / "topics.json").string());
  EXPECT_EQ(reg.size(), TopicRegistry::kDefaultCardinality);
  EXPECT_NO_THROW(reg.require_cardinality(12));
  EXPECT_THROW(reg.require_cardinality(11), InvariantError);
  for (const auto& t : tt::twelve_topics()) EXPECT_TRUE(reg.contains(t)) << t;
}

TEST(TopicRegistry, RejectsDuplicatesAndAcceptsBothShapes) {
  TopicRegistry reg;
  reg.add("Career");
  EXPECT_THROW(reg.add("career "), InvariantError);
  EXPECT_THROW(reg.add("  "), InvariantError);
  const auto a = TopicRegistry::from_json(Json::parse(R"(["a", "b"])"));
  EXPECT_EQ(a.size(), 2u);
  const auto b = TopicRegistry::from_json(Json::parse(R"({"topics": [{"id": "x", "display_name": "X topic"}]})"));
  ASSERT_TRUE(b.resolve("X"));
  EXPECT_EQ(b.resolve("x")->display_name, "X topic");
}

TEST(Validation, AcceptsWellFormedDialogue) {
  const auto t = make_transcript({{Role::client, "a"}, {Role::counselor, "b"}});
  EXPECT_TRUE(validate_transcript(t, ValidationRules::synthetic()).valid());
}

TEST(Validation, ReportsEveryRuleByKind) {
  EXPECT_TRUE(validate_transcript(make_transcript({{Role::counselor, "a"}, {Role::client, "b"}}), ValidationRules::synthetic())
                  .has(ViolationKind::first_role));
  EXPECT_TRUE(validate_transcript(make_transcript({{Role::client, "a"}, {Role::counselor, "b"}, {Role::client, "c"}}),
                                  ValidationRules::synthetic())
                  .has(ViolationKind::last_role));
  EXPECT_TRUE(validate_transcript(make_transcript({{Role::client, "a"}, {Role::client, "b"}, {Role::counselor, "c"}}),
                                  ValidationRules::synthetic())
                  .has(ViolationKind::alternation));
  EXPECT_TRUE(validate_transcript(make_transcript({{Role::client, " "}, {Role::counselor, "b"}}), ValidationRules::synthetic())
                  .has(ViolationKind::empty_content));
  EXPECT_TRUE(validate_transcript(make_transcript({{Role::client, "a"}, {Role::counselor, "b"}}), ValidationRules::synthetic(4))
                  .has(ViolationKind::min_length));
  EXPECT_TRUE(validate_transcript({}, ValidationRules::synthetic()).has(ViolationKind::min_length));
}

TEST(Validation, CasesMayEndWithTheClient) {
  CounselingCase c = tt::counseling_case("c1", "career");
  c.transcript.push_back({Role::client, "Thanks.", 4});
  EXPECT_TRUE(validate_dialogue(c).valid());
}

TEST(Provenance, FlagsDanglingAndMissingSources) {
  std::vector<SingleTurnDialogue> seeds{tt::seed("s1", "career")};
  MultiTurnDialogue ok{"d1", CounselingTopic::from("career"), {}, Provenance{"s1", "m", 1, "synthesis@v1"}, Json::object()};
  MultiTurnDialogue dangling = ok;
  dangling.id = "d2";
  dangling.provenance->source_single_turn_id = "s9";
  MultiTurnDialogue none = ok;
  none.id = "d3";
  none.provenance.reset();
  EXPECT_EQ(unresolved_provenance({ok, dangling, none}, seeds), (std::vector<std::string>{"d2", "d3"}));
}

TEST(Sanitize, RedactsContactDetails) {
  auto c = tt::counseling_case("c1", "career");
  c.transcript[0].content = " mail me at jo.doe@example.com or call 13800138000 ";
  const auto s = sanitize_case(c);
  EXPECT_TRUE(s.sanitized);
  EXPECT_EQ(s.transcript[0].content, "mail me at [EMAIL] or call [NUMBER]");
}

// ---- persistence -----------------------------------------------------------

namespace {

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces{"a", "b", "你", "好", " ", "é", "\"", "\\", "x y"};
  std::string s = "t";
  const auto n = rng() % 8;
  for (std::size_t i = 0; i < n; ++i) s += pieces[rng() % pieces.size()];
  return s;
}

}  // namespace

TEST(Persistence, RoundTripPropertyForEveryKind) {
  std::mt19937_64 rng(1234);
  for (int round = 0; round < 25; ++round) {
    std::vector<SingleTurnDialogue> st;
    std::vector<CounselingCase> cases;
    std::vector<MultiTurnDialogue> mt;
    std::vector<MiftSample> mift;
    std::vector<RatingRecord> ratings;
    for (int i = 0; i < 5; ++i) {
      const auto topic = tt::twelve_topics()[rng() % 12];
      auto s = tt::seed("s" + std::to_string(i), topic);
      s.title = random_text(rng);
      if (i % 2) s.extra["source"] = "forum";
      st.push_back(s);
      auto c = tt::counseling_case("c" + std::to_string(i), topic);
      c.sanitized = i % 2 == 0;
      cases.push_back(c);
      auto d = tt::random_dialogue(rng, "d" + std::to_string(i), topic);
      if (i % 2) d.provenance = Provenance{"s" + std::to_string(i), "mock", rng() % 1000, "synthesis@v1"};
      d.extra["note"] = random_text(rng);
      mt.push_back(d);
      MiftSample m{Transcript(d.transcript.begin(), d.transcript.begin() + 1), d.transcript[1].content, d.id, 1,
                   Json::object()};
      if (i % 2) m.extra["system"] = "be kind";
      mift.push_back(m);
      RatingRecord r{"r" + std::to_string(i), {}, {}, Json::object()};
      if (i % 2) {
        r.counts = {1, 2};
      } else {
        r.labels = {"x", "y", "x"};
      }
      ratings.push_back(r);
    }
    auto check = [](const auto& records, CorpusKind kind) {
      using V = std::decay_t<decltype(records)>;
      const auto text = serialize_corpus(records);
      const auto back = std::get<V>(parse_corpus(text, kind));
      EXPECT_EQ(back, records) << to_string(kind);
      EXPECT_EQ(serialize_corpus(back), text);
    };
    check(st, CorpusKind::single_turn);
    check(cases, CorpusKind::case_transcript);
    check(mt, CorpusKind::multi_turn);
    check(mift, CorpusKind::mift);
    check(ratings, CorpusKind::ratings);
  }
}

TEST(Persistence, MalformedJsonReportsLineAndColumn) {
  try {
    parse_corpus("[\n  {\"id\": }\n]", CorpusKind::single_turn);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), "line 2, column 10");
  }
}

TEST(Persistence, MissingFieldNamesTheRecord) {
  try {
    parse_corpus(R"([{"id": "a", "topic": "career", "title": "t", "detail": "d", "counselor_response": "r"},
                     {"id": "b", "topic": "career", "title": "t"}])",
                 CorpusKind::single_turn);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), "record 1");
  }
}

TEST(Persistence, InvalidTranscriptNamesTheDialogue) {
  try {
    parse_corpus(R"([{"id": "bad-1", "topic": "career", "messages": [{"role": "counselor", "content": "hi"},
                                                                     {"role": "client", "content": "yo"}]}])",
                 CorpusKind::multi_turn);
    FAIL();
  } catch (const InvariantError& e) {
    EXPECT_EQ(e.record_id(), "bad-1");
  }
}

TEST(Persistence, MiftLinesReportLineNumbers) {
  const std::string good =
      R"({"context": [{"role": "client", "content": "a"}], "target": "b", "source_dialogue_id": "d", "turn_index": 1})";
  try {
    parse_corpus(good + "\n\nnot json\n", CorpusKind::mift);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), "line 3");
  }
  const std::string wrong_index =
      R"({"context": [{"role": "client", "content": "a"}], "target": "b", "source_dialogue_id": "d", "turn_index": 2})";
  EXPECT_THROW(parse_corpus(wrong_index, CorpusKind::mift), InvariantError);
}

TEST(Persistence, TopicRegistryClosesTheTopicSet) {
  TopicRegistry reg(std::vector<std::string>{"career"});
  const std::string text =
      R"([{"id": "a", "topic": "marriage", "title": "t", "detail": "d", "counselor_response": "r"}])";
  EXPECT_NO_THROW(parse_corpus(text, CorpusKind::single_turn));
  EXPECT_THROW(parse_corpus(text, CorpusKind::single_turn, &reg), InvariantError);
}

TEST(Persistence, RatingsNeedExactlyOneShape) {
  EXPECT_THROW(parse_corpus(R"([{"id": "a"}])", CorpusKind::ratings), InvariantError);
  EXPECT_THROW(parse_corpus(R"([{"id": "a", "counts": [1], "labels": ["x"]}])", CorpusKind::ratings), InvariantError);
}

TEST(Persistence, FilesRoundTrip) {
  const auto dir = tt::temp_dir("corpus");
  std::vector<CounselingCase> cases{tt::counseling_case("c1", "career")};
  const auto path = (dir / "cases.json").string();
  save_corpus(cases, path);
  EXPECT_EQ(load_as<CounselingCase>(path, CorpusKind::case_transcript), cases);
  EXPECT_THROW(load_corpus((dir / "missing.json").string(), CorpusKind::case_transcript), IoError);
}

TEST(TopicRegistry, ResolvesDisplayNamesToRegistryIds) {
  const auto reg = TopicRegistry::from_json(Json::parse(R"([{"id": "mental-health", "display_name": "Mental health"}])"));
  ASSERT_TRUE(reg.resolve("Mental  Health"));
  EXPECT_EQ(reg.resolve("Mental  Health")->id, "mental-health");
  EXPECT_EQ(reg.resolve("mental-health")->display_name, "Mental health");
  const auto seeds = parse_corpus(
      R"([{"id": "s", "topic": "Mental health", "title": "t", "detail": "d", "counselor_response": "r"}])",
      CorpusKind::single_turn, &reg);
  EXPECT_EQ(std::get<std::vector<SingleTurnDialogue>>(seeds).at(0).topic.id, "mental-health");
}
