#pragma once

// Multi-turn dialogue synthesis. For every single-turn seed: simulate the
// client persona, match the topic's style profile, technique entry and
// exemplar case, render one synthesis prompt from all of them, and parse and
// validate the provider's transcript, re-asking with the violation report
// when it is malformed.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinsynth/corpus.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/prompt_template.hpp"
#include "twinsynth/provider.hpp"
#include "twinsynth/style.hpp"

namespace twinsynth {

// ---- matching --------------------------------------------------------------

const LinguisticStyleProfile& match_style(std::string_view topic,
                                          const std::map<std::string, LinguisticStyleProfile>& styles);
const TherapyTechniqueEntry& match_technique(std::string_view topic,
                                             const std::map<std::string, TherapyTechniqueEntry>& techniques);

// ---- context ---------------------------------------------------------------

// Stand-in guide texts; the original guide wording is not available.
std::string default_emotion_guide();
std::string default_response_guide();

struct SynthesisContext {
  CounselingCase exemplar_case;
  LinguisticStyleProfile style;
  TherapyTechniqueEntry technique;
  CounselingTopic technique_topic;  // topic the technique was matched for
  PersonalityProfile persona;
  SingleTurnDialogue seed_dialogue;
  std::string emotion_guide;
  std::string response_guide;

  bool topics_coherent() const;
};

// Builds the context for one seed; throws NoStyleForTopicError or
// NoTechniqueForTopicError for an uncovered topic and ConfigError when no
// exemplar case exists. The result always satisfies topics_coherent().
SynthesisContext make_context(const SingleTurnDialogue& seed, const StyleResources& resources,
                              const PersonalityProfile& persona, const std::string& emotion_guide,
                              const std::string& response_guide);

std::string format_technique(const TherapyTechniqueEntry& e);
std::string format_persona(const PersonalityProfile& p);

struct PromptOptions {
  bool strict_guides = true;  // empty guide text is a missing slot
  std::string turn_range = "between 12 and 24 utterances";
};

// Throws TopicMismatchError when the context is incoherent and
// MissingSlotError for missing (or, when strict, empty) slots.
std::string build_synthesis_prompt(const SynthesisContext& ctx, const PromptTemplate& tpl,
                                   const PromptOptions& opts = {});

enum class AblatedComponent { style, technique, persona };
std::optional<AblatedComponent> ablated_component_from_string(std::string_view s);

// Neutral placeholder texts used by ablation.
inline constexpr std::string_view kNeutralStyle = "No specific linguistic style; respond in a plain, neutral register.";
inline constexpr std::string_view kNeutralTechnique = "No specific therapy technique; offer general supportive counseling.";
inline constexpr std::string_view kNeutralTrait = "Not specified.";

SynthesisContext ablate_context(SynthesisContext ctx, AblatedComponent drop);

// ---- transcript parsing ----------------------------------------------------

struct SpeakerLexicon {
  std::vector<std::string> client;
  std::vector<std::string> counselor;

  // English and Chinese labels.
  static SpeakerLexicon standard();
};

class TranscriptParseError : public ParseError {
 public:
  enum class Kind { no_labels, dangling_prefix };
  TranscriptParseError(Kind k, const std::string& what, std::string location = {})
      : ParseError(what, std::move(location)), kind_(k) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Speaker-labelled lines ("client: ...", "咨询师：...") into utterances.
// Unlabelled lines continue the current utterance; consecutive same-role
// utterances are merged with a newline.
Transcript parse_transcript(std::string_view text, const SpeakerLexicon& lexicon = SpeakerLexicon::standard());

// ---- synthesis -------------------------------------------------------------

struct AttemptReport {
  int attempt = 0;
  std::string parse_error;  // empty when the reply parsed
  ValidationReport validation;

  std::string describe() const;
};

class SynthesisFailedError : public Error {
 public:
  SynthesisFailedError(const std::string& seed_id, std::vector<AttemptReport> reports);
  const std::vector<AttemptReport>& reports() const noexcept { return reports_; }

 private:
  std::vector<AttemptReport> reports_;
};

struct SynthesisConfig {
  std::size_t min_utterances = 4;
  int attempt_budget = 3;
  int persona_parse_attempts = 2;
  std::string emotion_guide = default_emotion_guide();
  std::string response_guide = default_response_guide();
  PromptOptions prompt;
  SpeakerLexicon lexicon = SpeakerLexicon::standard();

  Json to_json() const;
};

struct SynthesisTemplates {
  PromptTemplate synthesis;  // see build_synthesis_prompt for slots
  PromptTemplate persona;    // slots: title, detail, topic

  static SynthesisTemplates load(const TemplateStore& store);
};

struct SynthesisOutcome {
  MultiTurnDialogue dialogue;
  int attempts = 0;
  std::vector<AttemptReport> rejected;  // reports of the attempts that failed
};

SynthesisOutcome synthesize_from_context(const SynthesisContext& ctx, Gateway& gw, const PromptTemplate& tpl,
                                         const SynthesisConfig& cfg, std::uint64_t seed);

// Simulates the persona unless one is supplied.
SynthesisOutcome synthesize_dialogue(const SingleTurnDialogue& seed, const StyleResources& resources, Gateway& gw,
                                     const SynthesisTemplates& templates, const SynthesisConfig& cfg,
                                     std::uint64_t global_seed,
                                     const std::optional<PersonalityProfile>& persona = std::nullopt);

// ---- pipeline --------------------------------------------------------------

struct PipelineConfig {
  SynthesisConfig synthesis;
  std::uint64_t seed = 42;
  bool fail_fast = false;
  std::map<std::string, PersonalityProfile> personas;  // by seed id; simulated when absent
  std::string config_digest;                           // computed when empty

  Json to_json() const;
};

struct SeedStatus {
  std::string id;
  bool ok = false;
  int attempts = 0;
  std::string error;
};

struct RunReport {
  std::vector<SeedStatus> per_seed;
  Usage usage;
  std::uint64_t provider_calls = 0;
  std::string config_digest;

  std::size_t succeeded() const;
  std::size_t failed() const;
  Json to_json() const;
};

struct PipelineResult {
  std::vector<MultiTurnDialogue> dialogues;  // input order, failures omitted
  StyleResources resources;
  RunReport report;
};

// Configuration problems (missing templates, empty guides in strict mode,
// seed topics without a case, duplicate case topics, invalid cases) throw
// ConfigError before any provider call. Per-seed failures are collected
// unless fail_fast is set.
PipelineResult run_pipeline(const std::vector<SingleTurnDialogue>& seeds, const std::vector<CounselingCase>& cases,
                            const TechniqueKB& kb, Gateway& gw, const TemplateStore& templates,
                            const PipelineConfig& cfg);

}  // namespace twinsynth
