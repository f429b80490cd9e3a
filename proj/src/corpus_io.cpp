#include "twinsynth/corpus_io.hpp"

#include <fstream>
#include <sstream>

#include "twinsynth/errors.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {
namespace {

std::string at(const std::string& where, const std::string& field) {
  return where.empty() ? field : where + "." + field;
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ParseError("record is not a JSON object", where);
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'", where);
  return *it;
}

std::string require_string(const Json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string", where);
  return v.get<std::string>();
}

Json extras(const Json& j, std::initializer_list<const char*> known) {
  Json out = Json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool is_known = false;
    for (const char* k : known) is_known = is_known || it.key() == k;
    if (!is_known) out[it.key()] = it.value();
  }
  return out;
}

void merge_extras(Json& out, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    if (!out.contains(it.key())) out[it.key()] = it.value();
  }
}

void require_nonempty(const std::string& value, const char* field, const std::string& id) {
  if (text::trim(value).empty()) throw InvariantError(std::string("empty ") + field, id);
}

}  // namespace

std::string_view to_string(CorpusKind k) {
  switch (k) {
    case CorpusKind::single_turn: return "single_turn";
    case CorpusKind::case_transcript: return "case";
    case CorpusKind::multi_turn: return "multi_turn";
    case CorpusKind::mift: return "mift";
    case CorpusKind::ratings: break;
  }
  return "ratings";
}

CorpusKind corpus_kind_from_string(std::string_view s) {
  if (s == "single_turn") return CorpusKind::single_turn;
  if (s == "case") return CorpusKind::case_transcript;
  if (s == "multi_turn") return CorpusKind::multi_turn;
  if (s == "mift") return CorpusKind::mift;
  if (s == "ratings") return CorpusKind::ratings;
  throw UsageError("unknown corpus kind '" + std::string(s) + "'");
}

// ---- to_json ---------------------------------------------------------------

Json messages_to_json(const Transcript& t) {
  Json arr = Json::array();
  for (const auto& u : t) arr.push_back({{"role", to_string(u.role)}, {"content", u.content}});
  return arr;
}

Json to_json(const SingleTurnDialogue& d) {
  Json j = {{"id", d.id},
            {"topic", d.topic.display_name},
            {"title", d.title},
            {"detail", d.detail},
            {"counselor_response", d.counselor_response}};
  merge_extras(j, d.extra);
  return j;
}

Json to_json(const CounselingCase& c) {
  Json j = {{"id", c.id}, {"topic", c.topic.display_name}, {"messages", messages_to_json(c.transcript)},
            {"sanitized", c.sanitized}};
  merge_extras(j, c.extra);
  return j;
}

Json to_json(const MultiTurnDialogue& d) {
  Json j = {{"id", d.id}, {"topic", d.topic.display_name}, {"messages", messages_to_json(d.transcript)}};
  if (d.provenance) {
    j["provenance"] = {{"source_single_turn_id", d.provenance->source_single_turn_id},
                       {"provider_model_id", d.provenance->provider_model_id},
                       {"seed", d.provenance->seed},
                       {"template_version", d.provenance->template_version}};
  }
  merge_extras(j, d.extra);
  return j;
}

Json to_json(const MiftSample& s) {
  Json j = {{"context", messages_to_json(s.context)},
            {"target", s.target},
            {"source_dialogue_id", s.source_dialogue_id},
            {"turn_index", s.turn_index}};
  merge_extras(j, s.extra);
  return j;
}

Json to_json(const RatingRecord& r) {
  Json j = {{"id", r.id}};
  if (!r.counts.empty()) j["counts"] = r.counts;
  if (!r.labels.empty()) j["labels"] = r.labels;
  merge_extras(j, r.extra);
  return j;
}

Json to_json(const LinguisticStyleProfile& p) {
  return {{"topic", p.topic.display_name}, {"summary", p.summary}, {"source_case_id", p.source_case_id}};
}

Json to_json(const PersonalityProfile& p) {
  Json j = Json::object();
  for (Trait t : kAllTraits) {
    j[std::string(to_string(t))] = {{"level", to_string(p[t].level)}, {"rationale", p[t].rationale}};
  }
  return j;
}

Json to_json(const TherapyTechniqueEntry& e) {
  Json stages = Json::array();
  for (const auto& s : e.stages) stages.push_back({{"title", s.title}, {"guidance", s.guidance}});
  return {{"name", e.type.name},
          {"school", to_string(e.type.school)},
          {"aliases", e.aliases},
          {"description", e.description},
          {"stages", stages}};
}

// ---- from_json -------------------------------------------------------------

Transcript messages_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError("'messages' must be an array", where);
  Transcript t;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto w = where + "[" + std::to_string(i) + "]";
    const auto role = require_string(j[i], "role", w);
    Role r;
    try {
      r = role_from_string(role);
    } catch (const ParseError&) {
      throw ParseError("unknown role '" + role + "'", w);
    }
    t.push_back({r, require_string(j[i], "content", w), i});
  }
  return t;
}

SingleTurnDialogue single_turn_from_json(const Json& j, const std::string& where) {
  SingleTurnDialogue d;
  d.id = require_string(j, "id", where);
  d.topic = CounselingTopic::from(require_string(j, "topic", where));
  d.title = require_string(j, "title", where);
  d.detail = require_string(j, "detail", where);
  d.counselor_response = require_string(j, "counselor_response", where);
  d.extra = extras(j, {"id", "topic", "title", "detail", "counselor_response"});
  require_nonempty(d.id, "id", where);
  require_nonempty(d.topic.id, "topic", d.id);
  require_nonempty(d.title, "title", d.id);
  require_nonempty(d.detail, "detail", d.id);
  require_nonempty(d.counselor_response, "counselor_response", d.id);
  return d;
}

CounselingCase case_from_json(const Json& j, const std::string& where) {
  CounselingCase c;
  c.id = require_string(j, "id", where);
  c.topic = CounselingTopic::from(require_string(j, "topic", where));
  c.transcript = messages_from_json(require(j, "messages", where), at(where, "messages"));
  if (auto it = j.find("sanitized"); it != j.end()) {
    if (!it->is_boolean()) throw ParseError("'sanitized' must be a boolean", where);
    c.sanitized = it->get<bool>();
  }
  c.extra = extras(j, {"id", "topic", "messages", "sanitized"});
  require_nonempty(c.id, "id", where);
  require_nonempty(c.topic.id, "topic", c.id);
  if (auto rep = validate_dialogue(c); !rep.valid()) throw InvariantError("invalid transcript:\n" + rep.describe(), c.id);
  return c;
}

MultiTurnDialogue multi_turn_from_json(const Json& j, const std::string& where) {
  MultiTurnDialogue d;
  d.id = require_string(j, "id", where);
  d.topic = CounselingTopic::from(require_string(j, "topic", where));
  d.transcript = messages_from_json(require(j, "messages", where), at(where, "messages"));
  if (auto it = j.find("provenance"); it != j.end() && !it->is_null()) {
    const auto w = at(where, "provenance");
    Provenance p;
    p.source_single_turn_id = require_string(*it, "source_single_turn_id", w);
    p.provider_model_id = require_string(*it, "provider_model_id", w);
    const auto& seed = require(*it, "seed", w);
    if (!seed.is_number_integer()) throw ParseError("'seed' must be an integer", w);
    p.seed = seed.get<std::uint64_t>();
    p.template_version = require_string(*it, "template_version", w);
    d.provenance = std::move(p);
  }
  d.extra = extras(j, {"id", "topic", "messages", "provenance"});
  require_nonempty(d.id, "id", where);
  require_nonempty(d.topic.id, "topic", d.id);
  if (auto rep = validate_dialogue(d); !rep.valid()) throw InvariantError("invalid transcript:\n" + rep.describe(), d.id);
  return d;
}

MiftSample mift_from_json(const Json& j, const std::string& where) {
  MiftSample s;
  s.context = messages_from_json(require(j, "context", where), at(where, "context"));
  s.target = require_string(j, "target", where);
  s.source_dialogue_id = require_string(j, "source_dialogue_id", where);
  const auto& ti = require(j, "turn_index", where);
  if (!ti.is_number_unsigned() && !(ti.is_number_integer() && ti.get<long long>() >= 0)) {
    throw ParseError("'turn_index' must be a non-negative integer", where);
  }
  s.turn_index = ti.get<std::size_t>();
  s.extra = extras(j, {"context", "target", "source_dialogue_id", "turn_index"});
  const auto& id = s.source_dialogue_id;
  require_nonempty(s.target, "target", id);
  if (s.context.size() != s.turn_index) throw InvariantError("context length differs from turn_index", id);
  if (s.context.empty() || s.context.back().role != Role::client) {
    throw InvariantError("context must end with a client utterance", id);
  }
  if (auto rep = validate_transcript(s.context, {false, 1}); !rep.valid()) {
    throw InvariantError("invalid context:\n" + rep.describe(), id);
  }
  return s;
}

RatingRecord rating_from_json(const Json& j, const std::string& where) {
  RatingRecord r;
  r.id = require_string(j, "id", where);
  if (auto it = j.find("counts"); it != j.end()) {
    if (!it->is_array()) throw ParseError("'counts' must be an array", where);
    for (const auto& v : *it) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ParseError("counts must be non-negative integers", where);
      r.counts.push_back(v.get<int>());
    }
  }
  if (auto it = j.find("labels"); it != j.end()) {
    if (!it->is_array()) throw ParseError("'labels' must be an array", where);
    for (const auto& v : *it) r.labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  }
  r.extra = extras(j, {"id", "counts", "labels"});
  if (r.counts.empty() == r.labels.empty()) throw InvariantError("exactly one of 'counts' or 'labels' required", r.id);
  return r;
}

LinguisticStyleProfile style_from_json(const Json& j, const std::string& where) {
  LinguisticStyleProfile p;
  p.topic = CounselingTopic::from(require_string(j, "topic", where));
  p.summary = require_string(j, "summary", where);
  p.source_case_id = require_string(j, "source_case_id", where);
  require_nonempty(p.summary, "summary", p.source_case_id);
  return p;
}

PersonalityProfile personality_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError("personality must be a JSON object", where);
  PersonalityProfile p;
  for (Trait t : kAllTraits) {
    const std::string key(to_string(t));
    const auto& dim = require(j, key.c_str(), where);
    const auto w = at(where, key);
    auto level = level_from_string(require_string(dim, "level", w));
    if (!level) throw ParseError("unknown level", w + ".level");
    p[t].level = *level;
    p[t].rationale = require_string(dim, "rationale", w);
    if (text::trim(p[t].rationale).empty()) throw ParseError("empty rationale", w + ".rationale");
  }
  return p;
}

TherapyTechniqueEntry technique_from_json(const Json& j, const std::string& where) {
  TherapyTechniqueEntry e;
  e.type.name = text::trim(require_string(j, "name", where));
  e.type.school = school_from_string(j.value("school", "Other"));
  if (auto it = j.find("aliases"); it != j.end()) {
    for (const auto& a : *it) e.aliases.push_back(a.get<std::string>());
  }
  e.description = j.value("description", "");
  if (auto it = j.find("stages"); it != j.end()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto w = at(where, "stages[" + std::to_string(i) + "]");
      e.stages.push_back({require_string((*it)[i], "title", w), (*it)[i].value("guidance", "")});
    }
  }
  return e;
}

// ---- documents -------------------------------------------------------------

Json parse_json_document(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    auto loc = "line " + std::to_string(line) + ", column " + std::to_string(col);
    if (!source.empty()) loc = source + ": " + loc;
    throw ParseError("malformed JSON", loc);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

Json read_json_file(const std::string& path) { return parse_json_document(read_text_file(path), path); }

TopicRegistry TopicRegistry::load(const std::string& path) { return from_json(read_json_file(path)); }

namespace {

template <typename T, typename F>
std::vector<T> parse_array(const Json& doc, F&& from, const TopicRegistry* registry) {
  if (!doc.is_array()) throw ParseError("collection must be a top-level JSON array");
  std::vector<T> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto where = "record " + std::to_string(i);
    T rec = from(doc[i], where);
    if constexpr (requires { rec.topic; }) {
      if (registry) {
        auto resolved = registry->resolve(rec.topic.id);
        if (!resolved) throw InvariantError("topic '" + rec.topic.id + "' not in registry", rec.id);
        rec.topic = *resolved;
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<MiftSample> parse_lines(std::string_view text) {
  std::vector<MiftSample> out;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(text)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto where = "line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      throw ParseError("malformed JSON", where);
    }
    out.push_back(mift_from_json(j, where));
  }
  return out;
}

}  // namespace

Collection parse_corpus(std::string_view text, CorpusKind kind, const TopicRegistry* registry) {
  if (kind == CorpusKind::mift) return parse_lines(text);
  const Json doc = parse_json_document(text);
  switch (kind) {
    case CorpusKind::single_turn:
      return parse_array<SingleTurnDialogue>(doc, single_turn_from_json, registry);
    case CorpusKind::case_transcript:
      return parse_array<CounselingCase>(doc, case_from_json, registry);
    case CorpusKind::multi_turn:
      return parse_array<MultiTurnDialogue>(doc, multi_turn_from_json, registry);
    case CorpusKind::ratings:
      return parse_array<RatingRecord>(doc, rating_from_json, registry);
    case CorpusKind::mift:
      break;
  }
  return parse_lines(text);
}

Collection load_corpus(const std::string& path, CorpusKind kind, const TopicRegistry* registry) {
  const auto content = read_text_file(path);
  try {
    return parse_corpus(content, kind, registry);
  } catch (const ParseError& e) {
    throw ParseError(e.message() + " in '" + path + "'", e.location());
  }
}

std::string serialize_corpus(const Collection& c) {
  return std::visit(
      [](const auto& records) -> std::string {
        using T = typename std::decay_t<decltype(records)>::value_type;
        if constexpr (std::is_same_v<T, MiftSample>) {
          std::string out;
          for (const auto& r : records) out += to_json(r).dump() + "\n";
          return out;
        } else {
          Json arr = Json::array();
          for (const auto& r : records) arr.push_back(to_json(r));
          return arr.dump(2) + "\n";
        }
      },
      c);
}

void save_corpus(const Collection& c, const std::string& path) { write_text_file(path, serialize_corpus(c)); }

}  // namespace twinsynth
