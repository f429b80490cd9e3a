#pragma once

// Dynamic one-shot resources: per-topic linguistic style summaries and the
// therapy technique entry retrieved for each case's therapeutic type.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinsynth/corpus.hpp"
#include "twinsynth/prompt_template.hpp"
#include "twinsynth/provider.hpp"

namespace twinsynth {

// Lowercase, punctuation replaced by spaces, whitespace collapsed.
std::string normalize_type_name(std::string_view s);

class TechniqueKB {
 public:
  TechniqueKB() = default;
  explicit TechniqueKB(std::vector<TherapyTechniqueEntry> entries);

  // The seed knowledge base: every common therapeutic type with its school;
  // REBT carries its four dialogue stages, the rest a one-line description.
  static TechniqueKB builtin();
  static TechniqueKB from_json(const Json& j);
  static TechniqueKB load(const std::string& path);
  Json to_json() const;

  // Exact lookup by normalized name or alias.
  const TherapyTechniqueEntry* find(std::string_view name) const;
  // Exact lookup first, then a unique whole-phrase mention inside the text.
  // Returns nullptr when nothing or more than one distinct type matches.
  const TherapyTechniqueEntry* match_free_text(std::string_view text) const;

  const std::vector<TherapyTechniqueEntry>& entries() const { return entries_; }
  std::vector<std::string> type_names() const;

 private:
  std::vector<TherapyTechniqueEntry> entries_;
  std::map<std::string, std::size_t> index_;  // normalized name/alias -> entry
};

struct TypeClassification {
  TherapeuticType type;
  std::string raw_text;  // provider answer, kept for audit
};

struct StyleStageTemplates {
  PromptTemplate style;         // slots: topic, transcript
  PromptTemplate therapy_type;  // slots: topic, transcript, type_list

  static StyleStageTemplates load(const TemplateStore& store);
};

LinguisticStyleProfile summarize_linguistic_style(const CounselingCase& c, Gateway& gw, const PromptTemplate& tpl,
                                                  std::uint64_t seed);

TypeClassification classify_therapeutic_type(const CounselingCase& c, Gateway& gw, const TechniqueKB& kb,
                                             const PromptTemplate& tpl, std::uint64_t seed);

// Entries in input order, deduplicated by type name (first occurrence wins).
std::vector<TherapyTechniqueEntry> retrieve_technique(const std::vector<TherapeuticType>& types,
                                                      const TechniqueKB& kb);

struct StyleResources {
  std::map<std::string, LinguisticStyleProfile> styles;        // by topic id
  std::map<std::string, TherapyTechniqueEntry> techniques;     // by topic id
  std::map<std::string, TypeClassification> classifications;  // by topic id
  std::map<std::string, CounselingCase> cases;                 // by topic id

  Json to_json() const;
  static StyleResources from_json(const Json& j);
};

// Runs style summarization and type classification for every case (in
// parallel under the gateway limit), then retrieves techniques. Case topics
// must be distinct.
StyleResources extract_all(const std::vector<CounselingCase>& cases, Gateway& gw, const TechniqueKB& kb,
                           const StyleStageTemplates& templates, std::uint64_t global_seed);

}  // namespace twinsynth
