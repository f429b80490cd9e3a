#include "twinsynth/style.hpp"

#include <set>

#include "twinsynth/corpus_io.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/parallel.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {

namespace detail {
extern const char* const kBuiltinTechniqueKB;
}

std::string normalize_type_name(std::string_view s) {
  std::string out;
  for (char c : text::ascii_lower(s)) {
    const auto u = static_cast<unsigned char>(c);
    out.push_back(u < 0x80 && std::ispunct(u) ? ' ' : c);
  }
  return text::collapse_whitespace(out);
}

TechniqueKB::TechniqueKB(std::vector<TherapyTechniqueEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (text::trim(e.type.name).empty()) throw InvariantError("knowledge-base entry with empty name");
    if (e.stages.empty() && text::trim(e.description).empty()) {
      throw InvariantError("knowledge-base entry needs a description or stages", e.type.name);
    }
    std::set<std::string> titles;
    for (const auto& s : e.stages) {
      if (!titles.insert(s.title).second) throw InvariantError("duplicate stage title '" + s.title + "'", e.type.name);
    }
    std::vector<std::string> keys{normalize_type_name(e.type.name)};
    for (const auto& a : e.aliases) keys.push_back(normalize_type_name(a));
    for (const auto& k : keys) {
      auto [it, inserted] = index_.emplace(k, i);
      if (!inserted && it->second != i) throw InvariantError("knowledge-base key '" + k + "' is not unique", e.type.name);
    }
  }
}

TechniqueKB TechniqueKB::builtin() { return from_json(Json::parse(detail::kBuiltinTechniqueKB)); }

TechniqueKB TechniqueKB::from_json(const Json& j) {
  if (!j.is_object() || !j.contains("types") || !j.at("types").is_array()) {
    throw ParseError("knowledge base must be an object with a 'types' array");
  }
  std::vector<TherapyTechniqueEntry> entries;
  const auto& types = j.at("types");
  for (std::size_t i = 0; i < types.size(); ++i) {
    entries.push_back(technique_from_json(types[i], "types[" + std::to_string(i) + "]"));
  }
  return TechniqueKB(std::move(entries));
}

TechniqueKB TechniqueKB::load(const std::string& path) { return from_json(read_json_file(path)); }

Json TechniqueKB::to_json() const {
  Json types = Json::array();
  for (const auto& e : entries_) types.push_back(twinsynth::to_json(e));
  return {{"types", types}};
}

const TherapyTechniqueEntry* TechniqueKB::find(std::string_view name) const {
  auto it = index_.find(normalize_type_name(name));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const TherapyTechniqueEntry* TechniqueKB::match_free_text(std::string_view raw) const {
  if (const auto* e = find(raw)) return e;
  const auto hay = " " + normalize_type_name(raw) + " ";
  std::set<std::size_t> hits;
  for (const auto& [key, idx] : index_) {
    if (hay.find(" " + key + " ") != std::string::npos) hits.insert(idx);
  }
  return hits.size() == 1 ? &entries_[*hits.begin()] : nullptr;
}

std::vector<std::string> TechniqueKB::type_names() const {
  std::vector<std::string> names;
  for (const auto& e : entries_) names.push_back(e.type.name);
  return names;
}

StyleStageTemplates StyleStageTemplates::load(const TemplateStore& store) {
  return {store.get("style"), store.get("therapy_type")};
}

LinguisticStyleProfile summarize_linguistic_style(const CounselingCase& c, Gateway& gw, const PromptTemplate& tpl,
                                                  std::uint64_t seed) {
  const auto prompt = render_template(tpl, {{"topic", c.topic.display_name}, {"transcript", format_transcript(c.transcript)}});
  const auto resp = gw.ask(prompt, "style", seed);
  auto summary = text::trim(resp.text);
  if (summary.empty()) throw RefusalError("empty style summary for case '" + c.id + "'");
  return {c.topic, std::move(summary), c.id};
}

TypeClassification classify_therapeutic_type(const CounselingCase& c, Gateway& gw, const TechniqueKB& kb,
                                             const PromptTemplate& tpl, std::uint64_t seed) {
  std::string type_list;
  for (const auto& n : kb.type_names()) type_list += "- " + n + "\n";
  const auto prompt = render_template(tpl, {{"topic", c.topic.display_name},
                                            {"transcript", format_transcript(c.transcript)},
                                            {"type_list", type_list}});
  const auto resp = gw.ask(prompt, "therapy_type", seed);
  const auto* entry = kb.match_free_text(resp.text);
  if (!entry) throw UnrecognizedTypeError(text::trim(resp.text));
  return {entry->type, resp.text};
}

std::vector<TherapyTechniqueEntry> retrieve_technique(const std::vector<TherapeuticType>& types,
                                                      const TechniqueKB& kb) {
  std::vector<TherapyTechniqueEntry> out;
  std::set<std::string> seen;
  for (const auto& t : types) {
    const auto* e = kb.find(t.name);
    if (!e) throw LookupMissError(t.name);
    if (seen.insert(normalize_type_name(e->type.name)).second) out.push_back(*e);
  }
  return out;
}

Json StyleResources::to_json() const {
  Json j = Json::object();
  for (const auto& [topic, style] : styles) {
    Json rec = twinsynth::to_json(style);
    if (auto it = classifications.find(topic); it != classifications.end()) {
      rec["therapeutic_type"] = it->second.type.name;
      rec["therapeutic_type_raw"] = it->second.raw_text;
    }
    if (auto it = techniques.find(topic); it != techniques.end()) rec["technique"] = twinsynth::to_json(it->second);
    j[topic] = rec;
  }
  return j;
}

StyleResources StyleResources::from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("style profiles must be a JSON object keyed by topic");
  StyleResources r;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto style = style_from_json(*it, it.key());
    const auto topic = style.topic.id;
    r.styles.emplace(topic, std::move(style));
    if (it->contains("technique")) {
      auto tech = technique_from_json(it->at("technique"), it.key() + ".technique");
      r.classifications.emplace(topic, TypeClassification{tech.type, it->value("therapeutic_type_raw", "")});
      r.techniques.emplace(topic, std::move(tech));
    }
  }
  return r;
}

StyleResources extract_all(const std::vector<CounselingCase>& cases, Gateway& gw, const TechniqueKB& kb,
                           const StyleStageTemplates& templates, std::uint64_t global_seed) {
  std::set<std::string> topics;
  for (const auto& c : cases) {
    if (!topics.insert(c.topic.id).second) throw DuplicateTopicError(c.topic.id);
  }
  struct PerCase {
    LinguisticStyleProfile style;
    TypeClassification type;
  };
  auto results = parallel_map(cases.size(), gw.options().concurrency, [&](std::size_t i) {
    const auto& c = cases[i];
    const auto seed = text::derive_seed(global_seed, c.id);
    try {
      return PerCase{summarize_linguistic_style(c, gw, templates.style, seed),
                     classify_therapeutic_type(c, gw, kb, templates.therapy_type, seed)};
    } catch (const Error&) {
      std::throw_with_nested(ItemFailure("style extraction", c.id));
    }
  });
  std::vector<TherapeuticType> types;
  for (const auto& r : results) types.push_back(r.type.type);
  std::map<std::string, TherapyTechniqueEntry> by_type;
  for (auto& e : retrieve_technique(types, kb)) by_type.emplace(normalize_type_name(e.type.name), std::move(e));

  StyleResources out;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& topic = cases[i].topic.id;
    out.styles.emplace(topic, results[i].style);
    out.classifications.emplace(topic, results[i].type);
    out.techniques.emplace(topic, by_type.at(normalize_type_name(results[i].type.type.name)));
    out.cases.emplace(topic, cases[i]);
  }
  return out;
}

}  // namespace twinsynth
