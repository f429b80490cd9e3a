#include "twinsynth/synthesis.hpp"

#include <algorithm>
#include <set>

#include "twinsynth/corpus_io.hpp"
#include "twinsynth/parallel.hpp"
#include "twinsynth/persona.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {

const LinguisticStyleProfile& match_style(std::string_view topic,
                                          const std::map<std::string, LinguisticStyleProfile>& styles) {
  const auto key = text::normalize_key(topic);
  auto it = styles.find(key);
  if (it == styles.end()) throw NoStyleForTopicError(key);
  return it->second;
}

const TherapyTechniqueEntry& match_technique(std::string_view topic,
                                             const std::map<std::string, TherapyTechniqueEntry>& techniques) {
  const auto key = text::normalize_key(topic);
  auto it = techniques.find(key);
  if (it == techniques.end()) throw NoTechniqueForTopicError(key);
  return it->second;
}

std::string default_emotion_guide() {
  return "The client starts out with strong, raw emotion. As the counselor listens and responds, let the "
         "client's distress ease gradually and believably; no sudden turnarounds. By the end the client "
         "should sound calmer and a little more hopeful, though not every problem is solved.";
}

std::string default_response_guide() {
  return "Keep each counselor turn short and conversational, a few sentences at most. Reflect what the "
         "client feels, ask one open question at a time, and avoid lectures, lists or long blocks of "
         "advice.";
}

bool SynthesisContext::topics_coherent() const {
  const auto& t = seed_dialogue.topic;
  return style.topic == t && technique_topic == t && exemplar_case.topic == t;
}

SynthesisContext make_context(const SingleTurnDialogue& seed, const StyleResources& resources,
                              const PersonalityProfile& persona, const std::string& emotion_guide,
                              const std::string& response_guide) {
  const auto& style = match_style(seed.topic.id, resources.styles);
  const auto& technique = match_technique(seed.topic.id, resources.techniques);
  auto c = resources.cases.find(seed.topic.id);
  if (c == resources.cases.end()) throw ConfigError("no exemplar case for topic '" + seed.topic.id + "'");

  SynthesisContext ctx{c->second, style, technique, seed.topic, persona, seed, emotion_guide, response_guide};
  if (!ctx.topics_coherent()) {
    throw TopicMismatchError("resources for topic '" + seed.topic.id + "' disagree: style '" + style.topic.id +
                             "', exemplar case '" + c->second.topic.id + "'");
  }
  return ctx;
}

std::string format_technique(const TherapyTechniqueEntry& e) {
  std::string out = e.type.name;
  if (e.type.school != School::other) out += " (" + std::string(to_string(e.type.school)) + ")";
  out += "\n";
  if (!e.description.empty()) out += e.description + "\n";
  for (std::size_t i = 0; i < e.stages.size(); ++i) {
    out += std::to_string(i + 1) + ". " + e.stages[i].title;
    if (!e.stages[i].guidance.empty()) out += ": " + e.stages[i].guidance;
    out += "\n";
  }
  return text::trim(out);
}

std::string format_persona(const PersonalityProfile& p) {
  std::string out;
  for (Trait t : kAllTraits) {
    std::string name(to_string(t));
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    const auto& a = p[t];
    out += name + " (" + std::string(to_string(a.level)) + "): " + a.rationale + "\n";
  }
  return text::trim(out);
}

std::string build_synthesis_prompt(const SynthesisContext& ctx, const PromptTemplate& tpl, const PromptOptions& opts) {
  if (!ctx.topics_coherent()) throw TopicMismatchError("synthesis context mixes topics");
  const SlotMap slots{
      {"topic", ctx.seed_dialogue.topic.display_name},
      {"exemplar_case", format_transcript(ctx.exemplar_case.transcript)},
      {"linguistic_style", ctx.style.summary},
      {"therapy_technique", format_technique(ctx.technique)},
      {"client_personality", format_persona(ctx.persona)},
      {"seed_title", ctx.seed_dialogue.title},
      {"seed_detail", ctx.seed_dialogue.detail},
      {"seed_response", ctx.seed_dialogue.counselor_response},
      {"emotion_guide", ctx.emotion_guide},
      {"response_guide", ctx.response_guide},
      {"turn_range", opts.turn_range},
  };
  return render_template(tpl, slots, RenderOptions{opts.strict_guides});
}

std::optional<AblatedComponent> ablated_component_from_string(std::string_view s) {
  const auto k = text::normalize_key(s);
  if (k == "style") return AblatedComponent::style;
  if (k == "technique") return AblatedComponent::technique;
  if (k == "persona" || k == "personality") return AblatedComponent::persona;
  return std::nullopt;
}

SynthesisContext ablate_context(SynthesisContext ctx, AblatedComponent drop) {
  switch (drop) {
    case AblatedComponent::style:
      ctx.style.summary = std::string(kNeutralStyle);
      break;
    case AblatedComponent::technique:
      ctx.technique = TherapyTechniqueEntry{{"none", School::other}, {}, std::string(kNeutralTechnique), {}};
      break;
    case AblatedComponent::persona:
      for (auto& a : ctx.persona.traits) a = {Level::medium, std::string(kNeutralTrait)};
      break;
  }
  return ctx;
}

// ---- transcript parsing ----------------------------------------------------

SpeakerLexicon SpeakerLexicon::standard() {
  return {{"client", "来访者", "求助者", "访客"}, {"counselor", "counsellor", "心理咨询师", "咨询师", "therapist"}};
}

namespace {

constexpr std::string_view kFullwidthColon = "\xEF\xBC\x9A";

std::string_view strip_markup(std::string_view s) {
  while (!s.empty() && (s.front() == '*' || s.front() == '#' || s.front() == '>' || s.front() == '-' ||
                        s.front() == ' ' || s.front() == '_')) {
    s.remove_prefix(1);
  }
  return s;
}

// Content after "label:" when the line starts with the label.
std::optional<std::string> after_label(std::string_view line, std::string_view label) {
  if (!text::starts_with_icase(line, label)) return std::nullopt;
  auto rest = line.substr(label.size());
  while (!rest.empty() && (rest.front() == '*' || rest.front() == ' ' || rest.front() == '_')) rest.remove_prefix(1);
  if (rest.starts_with(':')) {
    rest.remove_prefix(1);
  } else if (rest.starts_with(kFullwidthColon)) {
    rest.remove_prefix(kFullwidthColon.size());
  } else {
    return std::nullopt;
  }
  return text::trim(strip_markup(rest));
}

}  // namespace

Transcript parse_transcript(std::string_view text, const SpeakerLexicon& lexicon) {
  std::vector<std::pair<std::string, Role>> labels;
  for (const auto& l : lexicon.client) labels.emplace_back(l, Role::client);
  for (const auto& l : lexicon.counselor) labels.emplace_back(l, Role::counselor);
  std::stable_sort(labels.begin(), labels.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });

  Transcript out;
  std::optional<std::size_t> dangling_line;
  const auto lines = text::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto trimmed = text::trim(lines[n]);
    if (trimmed.empty()) continue;
    const auto bare = strip_markup(trimmed);
    std::optional<std::pair<Role, std::string>> labelled;
    for (const auto& [label, role] : labels) {
      if (auto content = after_label(bare, label)) {
        labelled.emplace(role, std::move(*content));
        break;
      }
    }
    if (!labelled) {
      if (out.empty()) {
        if (!dangling_line) dangling_line = n + 1;
        continue;
      }
      auto& cur = out.back().content;
      cur += cur.empty() ? trimmed : "\n" + trimmed;
      continue;
    }
    auto& [role, content] = *labelled;
    if (!out.empty() && out.back().role == role) {
      auto& cur = out.back().content;
      cur += cur.empty() ? content : "\n" + content;
    } else {
      out.push_back({role, std::move(content), out.size()});
    }
  }
  if (out.empty()) throw TranscriptParseError(TranscriptParseError::Kind::no_labels, "no speaker labels found");
  if (dangling_line) {
    throw TranscriptParseError(TranscriptParseError::Kind::dangling_prefix,
                               "unlabelled text before the first speaker label",
                               "line " + std::to_string(*dangling_line));
  }
  reindex(out);
  return out;
}

// ---- synthesis -------------------------------------------------------------

std::string AttemptReport::describe() const {
  const auto head = "attempt " + std::to_string(attempt) + ": ";
  if (!parse_error.empty()) return head + parse_error;
  return head + validation.describe();
}

namespace {

std::string join_reports(const std::vector<AttemptReport>& reports) {
  std::string out;
  for (const auto& r : reports) out += "\n  " + r.describe();
  return out;
}

}  // namespace

SynthesisFailedError::SynthesisFailedError(const std::string& seed_id, std::vector<AttemptReport> reports)
    : Error("synthesis for '" + seed_id + "' produced no valid dialogue in " + std::to_string(reports.size()) +
            " attempts:" + join_reports(reports)),
      reports_(std::move(reports)) {}

Json SynthesisConfig::to_json() const {
  return {{"min_utterances", min_utterances},
          {"attempt_budget", attempt_budget},
          {"persona_parse_attempts", persona_parse_attempts},
          {"emotion_guide", emotion_guide},
          {"response_guide", response_guide},
          {"strict_guides", prompt.strict_guides},
          {"turn_range", prompt.turn_range},
          {"labels", {{"client", lexicon.client}, {"counselor", lexicon.counselor}}}};
}

SynthesisTemplates SynthesisTemplates::load(const TemplateStore& store) {
  return {store.get("synthesis"), store.get("persona")};
}

SynthesisOutcome synthesize_from_context(const SynthesisContext& ctx, Gateway& gw, const PromptTemplate& tpl,
                                         const SynthesisConfig& cfg, std::uint64_t seed) {
  const auto base = build_synthesis_prompt(ctx, tpl, cfg.prompt);
  const auto rules = ValidationRules::synthetic(cfg.min_utterances);
  std::vector<AttemptReport> reports;
  std::string prompt = base;
  for (int attempt = 1; attempt <= std::max(1, cfg.attempt_budget); ++attempt) {
    const auto resp = gw.ask(prompt, "synthesis", seed);
    AttemptReport report{attempt, {}, {}};
    try {
      auto transcript = parse_transcript(resp.text, cfg.lexicon);
      report.validation = validate_transcript(transcript, rules);
      if (report.validation.valid()) {
        MultiTurnDialogue d{"mt-" + ctx.seed_dialogue.id,
                            ctx.seed_dialogue.topic,
                            std::move(transcript),
                            Provenance{ctx.seed_dialogue.id, resp.provider_model_id, seed,
                                       tpl.id() + "@" + tpl.version()},
                            Json::object()};
        return {std::move(d), attempt, std::move(reports)};
      }
    } catch (const TranscriptParseError& e) {
      report.parse_error = e.what();
    }
    const auto problems = report.parse_error.empty() ? report.validation.describe() : report.parse_error;
    reports.push_back(std::move(report));
    prompt = base + "\n\nYour previous answer could not be used:\n" + problems +
             "\nWrite the complete dialogue again and fix these problems.";
  }
  throw SynthesisFailedError(ctx.seed_dialogue.id, std::move(reports));
}

SynthesisOutcome synthesize_dialogue(const SingleTurnDialogue& seed, const StyleResources& resources, Gateway& gw,
                                     const SynthesisTemplates& templates, const SynthesisConfig& cfg,
                                     std::uint64_t global_seed, const std::optional<PersonalityProfile>& persona) {
  const auto item_seed = text::derive_seed(global_seed, seed.id);
  // Resolve resources before spending a provider call on the persona.
  match_style(seed.topic.id, resources.styles);
  match_technique(seed.topic.id, resources.techniques);
  const auto profile =
      persona ? *persona : simulate_personality(seed, gw, templates.persona, item_seed, cfg.persona_parse_attempts).profile;
  const auto ctx = make_context(seed, resources, profile, cfg.emotion_guide, cfg.response_guide);
  return synthesize_from_context(ctx, gw, templates.synthesis, cfg, item_seed);
}

// ---- pipeline --------------------------------------------------------------

Json PipelineConfig::to_json() const {
  Json personas_j = Json::object();
  for (const auto& [id, p] : personas) personas_j[id] = twinsynth::to_json(p);
  return {{"synthesis", synthesis.to_json()}, {"seed", seed}, {"fail_fast", fail_fast}, {"personas", personas_j}};
}

std::size_t RunReport::succeeded() const {
  return static_cast<std::size_t>(std::count_if(per_seed.begin(), per_seed.end(), [](const auto& s) { return s.ok; }));
}

std::size_t RunReport::failed() const { return per_seed.size() - succeeded(); }

Json RunReport::to_json() const {
  Json seeds = Json::array();
  for (const auto& s : per_seed) {
    Json j{{"id", s.id}, {"status", s.ok ? "ok" : "failed"}, {"attempts", s.attempts}};
    if (!s.error.empty()) j["error"] = s.error;
    seeds.push_back(std::move(j));
  }
  return {{"per_seed", seeds},
          {"succeeded", succeeded()},
          {"failed", failed()},
          {"usage", {{"prompt_units", usage.prompt_units}, {"completion_units", usage.completion_units}}},
          {"provider_calls", provider_calls},
          {"config_digest", config_digest}};
}

namespace {

void check_configuration(const std::vector<SingleTurnDialogue>& seeds, const std::vector<CounselingCase>& cases,
                         const PipelineConfig& cfg) {
  const auto& syn = cfg.synthesis;
  if (syn.prompt.strict_guides) {
    if (text::trim(syn.emotion_guide).empty()) throw ConfigError("emotion guide is empty");
    if (text::trim(syn.response_guide).empty()) throw ConfigError("response guide is empty");
  }
  if (syn.attempt_budget < 1) throw ConfigError("attempt budget must be at least 1");
  if (syn.min_utterances < 2) throw ConfigError("minimum dialogue length must be at least 2");

  std::set<std::string> case_topics;
  for (const auto& c : cases) {
    if (!case_topics.insert(c.topic.id).second) throw ConfigError("two counseling cases share topic '" + c.topic.id + "'");
    if (const auto r = validate_dialogue(c); !r.valid()) {
      throw ConfigError("counseling case '" + c.id + "' is invalid: " + r.describe());
    }
  }
  std::set<std::string> ids;
  std::set<std::string> uncovered;
  for (const auto& s : seeds) {
    if (!ids.insert(s.id).second) throw ConfigError("duplicate seed id '" + s.id + "'");
    if (!case_topics.contains(s.topic.id)) uncovered.insert(s.topic.id);
  }
  if (!uncovered.empty()) {
    std::string list;
    for (const auto& t : uncovered) list += (list.empty() ? "" : ", ") + t;
    throw ConfigError("no counseling case for seed topics: " + list);
  }
}

std::pair<StyleStageTemplates, SynthesisTemplates> load_templates(const TemplateStore& store) {
  try {
    return {StyleStageTemplates::load(store), SynthesisTemplates::load(store)};
  } catch (const Error&) {
    std::throw_with_nested(ConfigError("prompt templates under '" + store.root().string() + "' are incomplete"));
  }
}

Usage usage_delta(const Usage& after, const Usage& before) {
  return {after.prompt_units - before.prompt_units, after.completion_units - before.completion_units};
}

}  // namespace

PipelineResult run_pipeline(const std::vector<SingleTurnDialogue>& seeds, const std::vector<CounselingCase>& cases,
                            const TechniqueKB& kb, Gateway& gw, const TemplateStore& templates,
                            const PipelineConfig& cfg) {
  check_configuration(seeds, cases, cfg);
  auto [style_tpl, synth_tpl] = load_templates(templates);

  PipelineResult result;
  result.report.config_digest =
      cfg.config_digest.empty()
          ? text::hex64(text::fnv1a64(cfg.to_json().dump() + "|" + gw.model_id() + "|" + synth_tpl.synthesis.version()))
          : cfg.config_digest;
  if (seeds.empty()) return result;

  const auto usage_before = gw.usage_totals();
  const auto calls_before = gw.completed_calls();
  result.resources = extract_all(cases, gw, kb, style_tpl, cfg.seed);

  struct SeedResult {
    std::optional<MultiTurnDialogue> dialogue;
    SeedStatus status;
  };
  auto per_seed = parallel_map(seeds.size(), gw.options().concurrency, [&](std::size_t i) {
    const auto& seed = seeds[i];
    SeedResult r{std::nullopt, {seed.id, false, 0, {}}};
    std::optional<PersonalityProfile> persona;
    if (auto it = cfg.personas.find(seed.id); it != cfg.personas.end()) persona = it->second;
    try {
      auto outcome = synthesize_dialogue(seed, result.resources, gw, synth_tpl, cfg.synthesis, cfg.seed, persona);
      r.status.ok = true;
      r.status.attempts = outcome.attempts;
      r.dialogue = std::move(outcome.dialogue);
    } catch (const Error& e) {
      if (cfg.fail_fast) std::throw_with_nested(ItemFailure("synthesis", seed.id));
      if (const auto* sf = dynamic_cast<const SynthesisFailedError*>(&e)) {
        r.status.attempts = static_cast<int>(sf->reports().size());
      }
      r.status.error = cause_chain(e);
    }
    return r;
  });

  for (auto& r : per_seed) {
    if (r.dialogue) result.dialogues.push_back(std::move(*r.dialogue));
    result.report.per_seed.push_back(std::move(r.status));
  }
  result.report.usage = usage_delta(gw.usage_totals(), usage_before);
  result.report.provider_calls = gw.completed_calls() - calls_before;
  return result;
}

}  // namespace twinsynth
