#pragma once

// Corpus domain types: topics, utterances, single-turn seeds, real counseling
// cases, synthesized multi-turn dialogues, persona profiles, technique
// entries and instruction-tuning samples, plus transcript validation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace twinsynth {

using Json = nlohmann::json;

enum class Role { client, counselor };

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);  // throws ParseError

struct Utterance {
  Role role = Role::client;
  std::string content;
  std::size_t index = 0;

  bool operator==(const Utterance&) const = default;
};

using Transcript = std::vector<Utterance>;

// Builds a transcript from (role, content) pairs, assigning indices.
Transcript make_transcript(std::initializer_list<std::pair<Role, std::string>> turns);
void reindex(Transcript& t);

// "client: ...\ncounselor: ..." lines, the form prompts and parsers use.
std::string format_transcript(const Transcript& t);

struct CounselingTopic {
  std::string id;            // normalized key
  std::string display_name;  // as first seen

  static CounselingTopic from(std::string_view raw);
  bool operator==(const CounselingTopic& o) const { return id == o.id; }
};

// The configured topic set. Topics are configuration, not constants; the
// default data file ships twelve.
class TopicRegistry {
 public:
  static constexpr std::size_t kDefaultCardinality = 12;

  TopicRegistry() = default;
  explicit TopicRegistry(const std::vector<std::string>& names);

  // Throws InvariantError on a duplicate or empty id.
  void add(std::string_view raw);
  void add(CounselingTopic t);
  bool contains(std::string_view raw) const;
  // Matches the normalized id first, then a normalized display name.
  std::optional<CounselingTopic> resolve(std::string_view raw) const;
  std::size_t size() const { return topics_.size(); }
  const std::vector<CounselingTopic>& topics() const { return topics_; }

  // Throws InvariantError when the registry does not hold exactly `n` topics.
  void require_cardinality(std::size_t n) const;

  static TopicRegistry from_json(const Json& j);
  static TopicRegistry load(const std::string& path);

 private:
  std::vector<CounselingTopic> topics_;
};

struct SingleTurnDialogue {
  std::string id;
  CounselingTopic topic;
  std::string title;
  std::string detail;
  std::string counselor_response;
  Json extra = Json::object();  // unknown fields, preserved on round-trip

  bool operator==(const SingleTurnDialogue&) const = default;
};

struct CounselingCase {
  std::string id;
  CounselingTopic topic;
  Transcript transcript;
  bool sanitized = false;
  Json extra = Json::object();

  bool operator==(const CounselingCase&) const = default;
};

struct Provenance {
  std::string source_single_turn_id;
  std::string provider_model_id;
  std::uint64_t seed = 0;
  std::string template_version;

  bool operator==(const Provenance&) const = default;
};

struct MultiTurnDialogue {
  std::string id;
  CounselingTopic topic;
  Transcript transcript;
  std::optional<Provenance> provenance;
  Json extra = Json::object();

  bool operator==(const MultiTurnDialogue&) const = default;
};

struct LinguisticStyleProfile {
  CounselingTopic topic;
  std::string summary;
  std::string source_case_id;

  bool operator==(const LinguisticStyleProfile&) const = default;
};

enum class School { psychodynamic, cognitive_behavioral, humanistic, postmodern, other };

std::string_view to_string(School s);
School school_from_string(std::string_view s);  // unknown names map to other

struct TherapeuticType {
  std::string name;
  School school = School::other;

  bool operator==(const TherapeuticType&) const = default;
};

struct TechniqueStage {
  std::string title;
  std::string guidance;

  bool operator==(const TechniqueStage&) const = default;
};

struct TherapyTechniqueEntry {
  TherapeuticType type;
  std::vector<std::string> aliases;
  std::string description;
  std::vector<TechniqueStage> stages;

  bool operator==(const TherapyTechniqueEntry&) const = default;
};

enum class Trait { openness, conscientiousness, extraversion, agreeableness, neuroticism };
inline constexpr std::array<Trait, 5> kAllTraits = {Trait::openness, Trait::conscientiousness,
                                                    Trait::extraversion, Trait::agreeableness,
                                                    Trait::neuroticism};
std::string_view to_string(Trait t);

enum class Level { low, medium, high };
std::string_view to_string(Level l);
std::optional<Level> level_from_string(std::string_view s);

struct TraitAssessment {
  Level level = Level::medium;
  std::string rationale;

  bool operator==(const TraitAssessment&) const = default;
};

// Big Five profile, stored in OCEAN order.
struct PersonalityProfile {
  std::array<TraitAssessment, 5> traits{};

  TraitAssessment& operator[](Trait t) { return traits[static_cast<std::size_t>(t)]; }
  const TraitAssessment& operator[](Trait t) const { return traits[static_cast<std::size_t>(t)]; }
  bool operator==(const PersonalityProfile&) const = default;
};

// One supervision pair: everything said before counselor turn `turn_index`,
// and what the counselor said there.
struct MiftSample {
  Transcript context;
  std::string target;
  std::string source_dialogue_id;
  std::size_t turn_index = 0;
  Json extra = Json::object();

  bool operator==(const MiftSample&) const = default;
};

// Raw expert ratings for one item: either per-category counts or one label per
// rater.
struct RatingRecord {
  std::string id;
  std::vector<int> counts;
  std::vector<std::string> labels;
  Json extra = Json::object();

  bool operator==(const RatingRecord&) const = default;
};

// ---- validation ------------------------------------------------------------

enum class ViolationKind { alternation, first_role, last_role, empty_content, min_length };
std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::size_t index = 0;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  bool has(ViolationKind k) const;
  std::string describe() const;
};

struct ValidationRules {
  bool counselor_last = true;
  std::size_t min_length = 2;

  static ValidationRules synthetic(std::size_t min_length = 2) { return {true, min_length}; }
  static ValidationRules counseling_case() { return {false, 2}; }
};

ValidationReport validate_transcript(const Transcript& t, const ValidationRules& rules);
ValidationReport validate_dialogue(const MultiTurnDialogue& d, std::size_t min_length = 2);
ValidationReport validate_dialogue(const CounselingCase& c);

// Every dialogue's provenance must point at a known single-turn id. Returns the
// ids of dialogues whose provenance is missing or dangling.
std::vector<std::string> unresolved_provenance(const std::vector<MultiTurnDialogue>& dialogues,
                                               const std::vector<SingleTurnDialogue>& seeds);

// Trims every utterance, redacts e-mail addresses and long digit runs (phone
// and id numbers) and marks the case sanitized.
CounselingCase sanitize_case(CounselingCase c);

}  // namespace twinsynth
