#pragma once

// Client persona simulation: ask the provider for a Big Five profile of the
// client behind a single-turn question and parse the answer strictly.

#include <cstdint>
#include <string>
#include <string_view>

#include "twinsynth/corpus.hpp"
#include "twinsynth/prompt_template.hpp"
#include "twinsynth/provider.hpp"

namespace twinsynth {

// Accepts a bare JSON object or one inside a markdown code fence, with prose
// around it tolerated. Keys are matched case-insensitively; a repeated key,
// a missing dimension, an unknown level or an empty rationale is a
// ParseError naming the offending key.
PersonalityProfile parse_personality(std::string_view text);
std::string serialize_personality(const PersonalityProfile& p);

struct PersonaResult {
  PersonalityProfile profile;
  std::string raw_text;
};

// Re-asks up to `parse_attempts` times when the reply does not parse, then
// rethrows the last ParseError.
PersonaResult simulate_personality(const SingleTurnDialogue& st, Gateway& gw, const PromptTemplate& tpl,
                                   std::uint64_t seed, int parse_attempts = 2);

// Integer richness score in [0, 10]. Prefers the last "score: N" pattern,
// otherwise the first integer in the text.
int parse_richness_score(std::string_view text);

int score_personality_richness(const SingleTurnDialogue& st, Gateway& gw, const PromptTemplate& tpl,
                               std::uint64_t seed);

}  // namespace twinsynth
