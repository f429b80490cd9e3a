#include "twinsynth/cli.hpp"

#include <functional>
#include <iostream>
#include <memory>
#include <set>

#include <CLI11.hpp>

#include "twinsynth/agreement.hpp"
#include "twinsynth/config.hpp"
#include "twinsynth/corpus_io.hpp"
#include "twinsynth/dataset.hpp"
#include "twinsynth/embedding.hpp"
#include "twinsynth/judge.hpp"
#include "twinsynth/metrics.hpp"
#include "twinsynth/parallel.hpp"
#include "twinsynth/persona.hpp"
#include "twinsynth/style.hpp"
#include "twinsynth/synthesis.hpp"
#include "twinsynth/text.hpp"

#ifndef TWINSYNTH_DEFAULT_TEMPLATES
#define TWINSYNTH_DEFAULT_TEMPLATES "templates"
#endif

namespace twinsynth {

std::string chat_system_prompt(const LinguisticStyleProfile& style, const TherapyTechniqueEntry& technique) {
  return "You are a psychological counselor talking with a client about " + style.topic.display_name +
         ".\n\nSpeak in this style:\n" + style.summary + "\n\nWork with this therapy technique:\n" +
         format_technique(technique) + "\n\nKeep each reply short and conversational.";
}

ChatSession run_chat(Gateway& gw, const std::string& system_prompt, std::istream& in, std::ostream& out,
                     std::uint64_t seed) {
  ChatSession s;
  std::string line;
  while (true) {
    out << "client> " << std::flush;
    if (!std::getline(in, line)) break;
    const auto said = text::trim(line);
    if (said.empty()) continue;
    if (said == "exit" || said == "quit") break;
    s.transcript.push_back({Role::client, said, s.transcript.size()});

    ChatRequest req;
    req.tag = "chat";
    req.seed = seed;
    req.decoding = gw.default_decoding();
    if (!system_prompt.empty()) req.messages.push_back({MessageRole::system, system_prompt});
    for (const auto& u : s.transcript) {
      req.messages.push_back({u.role == Role::client ? MessageRole::user : MessageRole::assistant, u.content});
    }
    try {
      const auto resp = gw.complete_chat(req);
      const auto reply = text::trim(resp.text);
      s.transcript.push_back({Role::counselor, reply, s.transcript.size()});
      out << "counselor> " << reply << "\n";
    } catch (const ProviderError& e) {
      s.provider_failed = true;
      s.error = cause_chain(e);
      break;
    }
  }
  return s;
}

namespace {

using nlohmann::json;

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  json defaults = json::object();
  std::set<std::string> outputs{"report"};
  bool report_to_stdout = true;
  std::function<json(const ResolvedConfig&, std::ostream&, std::istream&)> run;

  void option(const std::string& key, const std::string& help, json def = nullptr) {
    defaults[key] = std::move(def);
    app->add_option("--" + key, values[key], help);
  }
  void output(const std::string& key, const std::string& help) {
    option(key, help);
    outputs.insert(key);
  }
  void flag(const std::string& key, const std::string& help) {
    defaults[key] = false;
    app->add_flag("--" + key, switches[key], help);
  }

  json set_flags() const {
    json flags = json::object();
    for (const auto& [key, raw] : values) {
      if (app->get_option("--" + key)->count() == 0) continue;
      const auto& def = defaults.at(key);
      if (def.is_number_integer()) {
        try {
          std::size_t used = 0;
          const long long v = std::stoll(raw, &used);
          if (used != raw.size()) throw std::invalid_argument(raw);
          flags[key] = v;
        } catch (const std::logic_error&) {
          throw UsageError("--" + key + " expects an integer, got '" + raw + "'");
        }
      } else {
        flags[key] = raw;
      }
    }
    for (const auto& [key, on] : switches) {
      if (app->get_option("--" + key)->count() > 0) flags[key] = on;
    }
    return flags;
  }
};

std::string need(const ResolvedConfig& c, const std::string& key) {
  if (!c.has(key) || c.str(key).empty()) throw UsageError("--" + key + " is required");
  return c.str(key);
}

std::uint64_t seed_of(const ResolvedConfig& c) {
  const auto& v = c.view.at("seed");
  if (!v.is_number_integer() || v.get<long long>() < 0) throw UsageError("--seed must be a non-negative integer");
  return v.get<std::uint64_t>();
}

long long int_of(const ResolvedConfig& c, const std::string& key) {
  const auto& v = c.view.at(key);
  if (!v.is_number_integer()) throw UsageError("--" + key + " expects an integer");
  return v.get<long long>();
}

bool bool_of(const ResolvedConfig& c, const std::string& key) {
  const auto& v = c.view.at(key);
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<long long>() != 0;
  throw UsageError("--" + key + " is a switch");
}

std::shared_ptr<Gateway> make_gateway(const ResolvedConfig& c) {
  if (c.has("mock")) {
    auto j = read_json_file(c.str("mock"));
    if (!j.is_object() || !j.contains("script")) j = json{{"script", j}};
    return gateway_from_config(j);
  }
  if (c.has("provider")) return load_gateway(c.str("provider"));
  throw UsageError("a provider is required: pass --provider CONFIG or --mock SCRIPT");
}

json usage_json(const Gateway& gw) {
  const auto u = gw.usage_totals();
  return {{"prompt_units", u.prompt_units},
          {"completion_units", u.completion_units},
          {"provider_calls", gw.completed_calls()},
          {"model_id", gw.model_id()}};
}

TechniqueKB load_kb(const ResolvedConfig& c) { return c.has("kb") ? TechniqueKB::load(c.str("kb")) : TechniqueKB::builtin(); }

std::optional<TopicRegistry> load_topics(const ResolvedConfig& c) {
  if (!c.has("topics")) return std::nullopt;
  return TopicRegistry::load(c.str("topics"));
}

template <typename T>
std::vector<T> load_records(const std::string& path, CorpusKind kind, const std::optional<TopicRegistry>& topics) {
  return load_as<T>(path, kind, topics ? &*topics : nullptr);
}

void provider_options(Command& cmd) {
  cmd.option("provider", "provider config file (HTTP endpoint or mock script)");
  cmd.option("mock", "scripted mock provider file");
  cmd.option("templates", "prompt template directory", TWINSYNTH_DEFAULT_TEMPLATES);
  cmd.option("seed", "global random seed", 42);
}

// ---- subcommands -----------------------------------------------------------

void add_extract_style(Command& cmd) {
  cmd.option("cases", "counseling cases file");
  cmd.option("kb", "technique knowledge base (defaults to the built-in one)");
  cmd.option("topics", "topic registry file");
  cmd.output("out", "style profiles output file");
  provider_options(cmd);
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto cases = load_records<CounselingCase>(need(c, "cases"), CorpusKind::case_transcript, load_topics(c));
    const auto out = need(c, "out");
    auto gw = make_gateway(c);
    const TemplateStore store(c.str("templates"));
    const auto res = extract_all(cases, *gw, load_kb(c), StyleStageTemplates::load(store), seed_of(c));
    write_text_file(out, res.to_json().dump(2) + "\n");
    return json{{"topics", res.styles.size()}, {"out", out}, {"usage", usage_json(*gw)}};
  };
}

void add_simulate_persona(Command& cmd) {
  cmd.option("seeds", "single-turn seed dialogues file");
  cmd.output("out", "personas output file, keyed by seed id");
  cmd.output("richness-out", "optional richness scores output file");
  cmd.option("parse-attempts", "provider attempts per persona when the reply does not parse", 2);
  provider_options(cmd);
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto seeds = load_records<SingleTurnDialogue>(need(c, "seeds"), CorpusKind::single_turn, std::nullopt);
    const auto out = need(c, "out");
    auto gw = make_gateway(c);
    const TemplateStore store(c.str("templates"));
    const auto persona_tpl = store.get("persona");
    const bool richness = c.has("richness-out");
    std::optional<PromptTemplate> richness_tpl;
    if (richness) richness_tpl = store.get("richness");
    const auto attempts = static_cast<int>(int_of(c, "parse-attempts"));
    const auto global = seed_of(c);

    struct Row {
      PersonalityProfile profile;
      std::optional<int> score;
    };
    const auto rows = parallel_map(seeds.size(), gw->options().concurrency, [&](std::size_t i) {
      const auto& s = seeds[i];
      const auto item_seed = text::derive_seed(global, s.id);
      try {
        Row r{simulate_personality(s, *gw, persona_tpl, item_seed, attempts).profile, std::nullopt};
        if (richness) r.score = score_personality_richness(s, *gw, *richness_tpl, item_seed);
        return r;
      } catch (const Error&) {
        std::throw_with_nested(ItemFailure("persona simulation", s.id));
      }
    });
    json personas = json::object();
    json scores = json::object();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      personas[seeds[i].id] = to_json(rows[i].profile);
      if (rows[i].score) scores[seeds[i].id] = *rows[i].score;
    }
    write_text_file(out, personas.dump(2) + "\n");
    if (richness) write_text_file(c.str("richness-out"), scores.dump(2) + "\n");
    return json{{"personas", seeds.size()}, {"out", out}, {"usage", usage_json(*gw)}};
  };
}

void add_filter(Command& cmd) {
  cmd.option("seeds", "single-turn seed dialogues file");
  cmd.option("scores", "richness scores file {id: score}; scored by the provider when absent");
  cmd.option("threshold", "minimum richness score to keep", 7);
  cmd.output("out", "filtered seeds output file");
  provider_options(cmd);
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto seeds = load_records<SingleTurnDialogue>(need(c, "seeds"), CorpusKind::single_turn, std::nullopt);
    const auto out = need(c, "out");
    std::map<std::string, int> scores;
    json usage = nullptr;
    if (c.has("scores")) {
      const auto j = read_json_file(c.str("scores"));
      if (!j.is_object()) throw ParseError("scores file must be an object keyed by seed id");
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it->is_number_integer()) throw ParseError("score must be an integer", it.key());
        scores[it.key()] = it->get<int>();
      }
    } else {
      auto gw = make_gateway(c);
      const auto tpl = TemplateStore(c.str("templates")).get("richness");
      const auto global = seed_of(c);
      const auto got = parallel_map(seeds.size(), gw->options().concurrency, [&](std::size_t i) {
        return score_personality_richness(seeds[i], *gw, tpl, text::derive_seed(global, seeds[i].id));
      });
      for (std::size_t i = 0; i < seeds.size(); ++i) scores[seeds[i].id] = got[i];
      usage = usage_json(*gw);
    }
    const auto kept = filter_by_richness(seeds, scores, static_cast<int>(int_of(c, "threshold")));
    save_corpus(kept, out);
    return json{{"input", seeds.size()}, {"kept", kept.size()}, {"out", out}, {"usage", usage}};
  };
}

void add_synthesize(Command& cmd) {
  cmd.option("seeds", "single-turn seed dialogues file");
  cmd.option("cases", "counseling cases file, one per topic");
  cmd.option("kb", "technique knowledge base (defaults to the built-in one)");
  cmd.option("topics", "topic registry file");
  cmd.option("personas", "pre-computed personas file keyed by seed id");
  cmd.option("attempts", "synthesis attempts per seed", 3);
  cmd.option("min-utterances", "minimum utterances in a synthesized dialogue", 4);
  cmd.option("turn-range", "desired dialogue length hint for the prompt", "between 12 and 24 utterances");
  cmd.option("emotion-guide", "emotion guide text file (defaults to the built-in stand-in)");
  cmd.option("response-guide", "response guide text file (defaults to the built-in stand-in)");
  cmd.flag("fail-fast", "abort on the first failed seed");
  cmd.output("out", "synthesized dialogues output file");
  cmd.output("styles-out", "optional output for the extracted style profiles");
  provider_options(cmd);
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto topics = load_topics(c);
    const auto seeds = load_records<SingleTurnDialogue>(need(c, "seeds"), CorpusKind::single_turn, topics);
    const auto cases = load_records<CounselingCase>(need(c, "cases"), CorpusKind::case_transcript, topics);
    const auto out = need(c, "out");
    const auto kb = load_kb(c);

    PipelineConfig pc;
    pc.seed = seed_of(c);
    pc.fail_fast = bool_of(c, "fail-fast");
    pc.synthesis.attempt_budget = static_cast<int>(int_of(c, "attempts"));
    pc.synthesis.min_utterances = static_cast<std::size_t>(std::max(0LL, int_of(c, "min-utterances")));
    pc.synthesis.prompt.turn_range = c.str("turn-range");
    if (c.has("emotion-guide")) pc.synthesis.emotion_guide = read_text_file(c.str("emotion-guide"));
    if (c.has("response-guide")) pc.synthesis.response_guide = read_text_file(c.str("response-guide"));
    if (c.has("personas")) {
      const auto j = read_json_file(c.str("personas"));
      if (!j.is_object()) throw ParseError("personas file must be an object keyed by seed id");
      for (auto it = j.begin(); it != j.end(); ++it) pc.personas.emplace(it.key(), personality_from_json(*it, it.key()));
    }
    pc.config_digest = c.digest;

    auto gw = make_gateway(c);
    const TemplateStore store(c.str("templates"));
    auto result = run_pipeline(seeds, cases, kb, *gw, store, pc);
    save_corpus(result.dialogues, out);
    if (c.has("styles-out")) write_text_file(c.str("styles-out"), result.resources.to_json().dump(2) + "\n");
    auto rep = result.report.to_json();
    rep["out"] = out;
    return rep;
  };
}

void add_validate(Command& cmd) {
  cmd.option("in", "corpus file");
  cmd.option("kind", "single_turn | case | multi_turn | mift | ratings", "multi_turn");
  cmd.option("topics", "topic registry file");
  cmd.option("min-utterances", "minimum utterances for multi-turn dialogues", 2);
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto kind = corpus_kind_from_string(c.str("kind"));
    const auto topics = load_topics(c);
    const auto corpus = load_corpus(need(c, "in"), kind, topics ? &*topics : nullptr);
    std::size_t n = 0;
    std::visit([&](const auto& v) { n = v.size(); }, corpus);
    if (const auto* dialogues = std::get_if<std::vector<MultiTurnDialogue>>(&corpus)) {
      const auto min = static_cast<std::size_t>(std::max(0LL, int_of(c, "min-utterances")));
      for (const auto& d : *dialogues) {
        if (const auto r = validate_dialogue(d, min); !r.valid()) throw InvariantError(r.describe(), d.id);
      }
    }
    return json{{"records", n}, {"kind", std::string(to_string(kind))}, {"valid", true}};
  };
}

void add_stats(Command& cmd) {
  cmd.option("in", "multi-turn dialogues file");
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    return compute_stats(load_records<MultiTurnDialogue>(need(c, "in"), CorpusKind::multi_turn, std::nullopt)).to_json();
  };
}

void add_split(Command& cmd) {
  cmd.option("in", "multi-turn dialogues file");
  cmd.option("per-topic-test", "test dialogues per topic", 20);
  cmd.option("seed", "shuffle seed", 42);
  cmd.output("train", "train split output file");
  cmd.output("test", "test split output file");
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto corpus = load_records<MultiTurnDialogue>(need(c, "in"), CorpusKind::multi_turn, std::nullopt);
    const auto train_path = need(c, "train");
    const auto test_path = need(c, "test");
    const auto k = int_of(c, "per-topic-test");
    if (k < 0) throw UsageError("--per-topic-test must not be negative");
    const auto split = split_dataset(corpus, static_cast<std::size_t>(k), seed_of(c));
    save_corpus(split.train, train_path);
    save_corpus(split.test, test_path);
    return json{{"train", split.train.size()}, {"test", split.test.size()}};
  };
}

void add_export_mift(Command& cmd) {
  cmd.option("in", "multi-turn dialogues file");
  cmd.option("system-prompt", "text file attached as the system prompt of every record");
  cmd.output("out", "line-delimited JSON output file");
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto corpus = load_records<MultiTurnDialogue>(need(c, "in"), CorpusKind::multi_turn, std::nullopt);
    MiftExportOptions opts;
    if (c.has("system-prompt")) opts.system_prompt = text::trim(read_text_file(c.str("system-prompt")));
    const auto n = export_mift_corpus(corpus, need(c, "out"), opts);
    return json{{"dialogues", corpus.size()}, {"samples", n}};
  };
}

void add_eval_auto(Command& cmd) {
  cmd.option("pairs", "JSON array of {generated, reference}");
  cmd.option("tokenizer", "cjk_char | whitespace | provided", "cjk_char");
  cmd.option("embedder", "mock, or an embedding endpoint config file; F_BERT is skipped when absent");
  cmd.output("csv", "optional CSV output (x100, two decimals)");
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto pairs = pairs_from_json(read_json_file(need(c, "pairs")));
    const auto mode = tokenizer_mode_from_string(c.str("tokenizer"));
    std::unique_ptr<EmbeddingProvider> embedder;
    if (c.has("embedder")) {
      const auto e = c.str("embedder");
      embedder = e == "mock" ? std::make_unique<HashEmbedder>() : embedder_from_config(read_json_file(e));
    }
    const auto rep = evaluate_model_outputs(pairs, mode, embedder.get());
    if (c.has("csv")) write_text_file(c.str("csv"), rep.to_csv());
    auto j = rep.to_json();
    j["tokenizer"] = std::string(to_string(mode));
    return j;
  };
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    auto item = text::trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void add_eval_judge(Command& cmd) {
  cmd.option("dimension", "rubric dimension, e.g. EmoE, Saf, LinguisticSimilarity");
  cmd.option("judges", "comma-separated provider config files, one per judge");
  cmd.option("subjects", "JSON array of {id, <slot>: text}");
  cmd.option("template-version", "judge template version (latest when empty)", "");
  cmd.option("templates", "prompt template directory", TWINSYNTH_DEFAULT_TEMPLATES);
  cmd.option("seed", "global random seed", 42);
  cmd.output("csv", "optional per-subject CSV output");
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto dim = judge_dimension_from_string(need(c, "dimension"));
    const auto paths = split_list(need(c, "judges"));
    if (paths.empty()) throw UsageError("--judges names no provider config");
    std::vector<std::shared_ptr<Gateway>> owned;
    std::vector<Gateway*> judges;
    for (const auto& p : paths) {
      auto j = read_json_file(p);
      if (!j.contains("endpoint_url") && !j.contains("script")) j = json{{"script", j}};
      owned.push_back(gateway_from_config(j));
      judges.push_back(owned.back().get());
    }
    const auto subjects = judge_subjects_from_json(read_json_file(need(c, "subjects")));
    const auto tpl = TemplateStore(c.str("templates")).get(judge_stage(dim), c.str("template-version"));
    const auto judged = judge_all(subjects, dim, judges, tpl, seed_of(c));
    if (c.has("csv")) write_text_file(c.str("csv"), judged_to_csv(judged));
    auto rep = judged_to_json(judged);
    rep["dimension"] = std::string(to_string(dim));
    rep["template_version"] = tpl.version();
    return rep;
  };
}

void add_kappa(Command& cmd) {
  cmd.option("ratings", "ratings file: [{id, counts}] or [{id, labels}]");
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    const auto m = RatingMatrix::from_records(
        load_records<RatingRecord>(need(c, "ratings"), CorpusKind::ratings, std::nullopt));
    const double k = fleiss_kappa(m);
    return json{{"kappa", k}, {"items", m.items()}, {"raters", m.raters()}, {"categories", m.counts.front().size()}};
  };
}

void add_vote(Command& cmd) {
  cmd.option("choices", "votes file {reference, raters?, items: [{id, choices}]}");
  cmd.run = [](const ResolvedConfig& c, std::ostream&, std::istream&) {
    return majority_vote(VoteInput::from_json(read_json_file(need(c, "choices")))).to_json();
  };
}

void add_chat(Command& cmd) {
  cmd.option("provider", "provider config file");
  cmd.option("mock", "scripted mock provider file");
  cmd.option("system-prompt", "system prompt text file");
  cmd.option("styles", "style profiles file (from extract-style) to build the system prompt from");
  cmd.option("topic", "topic whose style and technique shape the system prompt");
  cmd.option("seed", "provider seed", 42);
  cmd.output("out", "transcript output file");
  cmd.report_to_stdout = false;
  cmd.run = [](const ResolvedConfig& c, std::ostream& out, std::istream& in) {
    const auto path = need(c, "out");
    std::string system_prompt;
    CounselingTopic topic = CounselingTopic::from(c.has("topic") ? c.str("topic") : "chat");
    if (c.has("system-prompt")) {
      system_prompt = text::trim(read_text_file(c.str("system-prompt")));
    } else if (c.has("styles")) {
      const auto res = StyleResources::from_json(read_json_file(c.str("styles")));
      const auto t = need(c, "topic");
      system_prompt = chat_system_prompt(match_style(t, res.styles), match_technique(t, res.techniques));
    }
    auto gw = make_gateway(c);
    auto session = run_chat(*gw, system_prompt, in, out, seed_of(c));
    MultiTurnDialogue d{"chat-" + text::hex64(text::fnv1a64(c.digest)), topic, session.transcript, std::nullopt,
                        json::object()};
    save_corpus(std::vector<MultiTurnDialogue>{d}, path);
    if (session.provider_failed) {
      throw ProviderError("chat ended by a provider error, partial transcript saved to '" + path + "': " + session.error);
    }
    return json{{"utterances", d.transcript.size()}, {"out", path}, {"usage", usage_json(*gw)}};
  };
}

void print_cause_chain(std::ostream& err, const std::exception& e, int depth = 0) {
  err << (depth == 0 ? "error: " : std::string(static_cast<std::size_t>(depth) * 2, ' ') + "caused by: ") << e.what()
      << "\n";
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_cause_chain(err, inner, depth + 1);
  } catch (...) {
    err << "  caused by: unknown error\n";
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Counselor digital-twin dialogue synthesis and evaluation toolkit", "twinsynth"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (also TWINSYNTH_CONFIG)");

  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help, void (*setup)(Command&)) {
    auto cmd = std::make_unique<Command>();
    cmd->name = name;
    cmd->app = app.add_subcommand(name, help);
    cmd->output("report", "also write the run report to this file");
    setup(*cmd);
    commands.push_back(std::move(cmd));
  };
  add("extract-style", "summarize linguistic style and therapy technique per counseling case", add_extract_style);
  add("simulate-persona", "infer Big Five client personas for seed dialogues", add_simulate_persona);
  add("filter", "keep seeds whose persona richness reaches a threshold", add_filter);
  add("synthesize", "synthesize multi-turn dialogues from single-turn seeds", add_synthesize);
  add("validate", "load and validate a corpus file", add_validate);
  add("stats", "dataset statistics (turns, client and counselor utterance length)", add_stats);
  add("split", "per-topic stratified train/test split", add_split);
  add("export-mift", "export multi-turn instruction-tuning samples as JSON lines", add_export_mift);
  add("eval-auto", "ROUGE, BLEU-4 and F_BERT over generated/reference pairs", add_eval_auto);
  add("eval-judge", "LLM-as-judge scoring on one rubric dimension", add_eval_judge);
  add("kappa", "Fleiss' kappa over expert ratings", add_kappa);
  add("vote", "majority vote and agreement with a reference choice", add_vote);
  add("chat", "interactive counselor chat session", add_chat);
  for (auto& c : commands) {
    c->app->add_option("--config", config_path, "JSON config file (also TWINSYNTH_CONFIG)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  Command* cmd = nullptr;
  for (auto& c : commands) {
    if (c->app->parsed()) cmd = c.get();
  }
  if (!cmd) {
    err << app.help();
    return 2;
  }

  try {
    ConfigLayers layers;
    layers.defaults = cmd->defaults;
    if (!config_path.empty()) layers.config_path = config_path;
    layers.flags = cmd->set_flags();
    layers.digest_excluded = cmd->outputs;
    const auto cfg = resolve_config(layers);

    auto report = cmd->run(cfg, out, in);
    report["command"] = cmd->name;
    report["config_digest"] = cfg.digest;
    const auto text = report.dump(2) + "\n";
    if (cmd->report_to_stdout) out << text;
    if (cfg.has("report")) write_text_file(cfg.str("report"), text);
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n\n" << cmd->app->help();
    return 2;
  } catch (const std::exception& e) {
    print_cause_chain(err, e);
    return 1;
  }
}

}  // namespace twinsynth
