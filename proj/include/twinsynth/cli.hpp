#pragma once

#include <iosfwd>
#include <string>

#include "twinsynth/corpus.hpp"
#include "twinsynth/provider.hpp"

namespace twinsynth {

// Runs one subcommand. Returns 0 on success, 1 on a domain error (cause
// chain printed to `err`) and 2 on a usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in);

struct ChatSession {
  Transcript transcript;
  bool provider_failed = false;
  std::string error;
};

// Line-oriented chat loop. Blank lines re-prompt, "exit" or end of input
// ends the session. A provider error ends it early; the transcript so far is
// still returned.
ChatSession run_chat(Gateway& gw, const std::string& system_prompt, std::istream& in, std::ostream& out,
                     std::uint64_t seed = 42);

// Style summary plus technique text, for a counselor system prompt.
std::string chat_system_prompt(const LinguisticStyleProfile& style, const TherapyTechniqueEntry& technique);

}  // namespace twinsynth
