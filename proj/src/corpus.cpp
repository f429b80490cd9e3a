#include "twinsynth/corpus.hpp"

#include <regex>
#include <set>
#include <sstream>

#include "twinsynth/errors.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {

std::string_view to_string(Role r) { return r == Role::client ? "client" : "counselor"; }

Role role_from_string(std::string_view s) {
  if (s == "client") return Role::client;
  if (s == "counselor") return Role::counselor;
  throw ParseError("unknown role '" + std::string(s) + "'");
}

Transcript make_transcript(std::initializer_list<std::pair<Role, std::string>> turns) {
  Transcript t;
  t.reserve(turns.size());
  for (const auto& [role, content] : turns) t.push_back({role, content, t.size()});
  return t;
}

void reindex(Transcript& t) {
  for (std::size_t i = 0; i < t.size(); ++i) t[i].index = i;
}

std::string format_transcript(const Transcript& t) {
  std::string out;
  for (const auto& u : t) {
    if (!out.empty()) out += '\n';
    out += to_string(u.role);
    out += ": ";
    out += u.content;
  }
  return out;
}

CounselingTopic CounselingTopic::from(std::string_view raw) {
  return {text::normalize_key(raw), text::trim(raw)};
}

TopicRegistry::TopicRegistry(const std::vector<std::string>& names) {
  for (const auto& n : names) add(n);
}

void TopicRegistry::add(std::string_view raw) { add(CounselingTopic::from(raw)); }

void TopicRegistry::add(CounselingTopic t) {
  if (t.id.empty()) throw InvariantError("empty topic id");
  if (contains(t.id)) throw InvariantError("duplicate topic id '" + t.id + "'");
  topics_.push_back(std::move(t));
}

bool TopicRegistry::contains(std::string_view raw) const { return resolve(raw).has_value(); }

std::optional<CounselingTopic> TopicRegistry::resolve(std::string_view raw) const {
  const auto id = text::normalize_key(raw);
  for (const auto& t : topics_) {
    if (t.id == id) return t;
  }
  for (const auto& t : topics_) {
    if (text::normalize_key(t.display_name) == id) return t;
  }
  return std::nullopt;
}

void TopicRegistry::require_cardinality(std::size_t n) const {
  if (topics_.size() != n) {
    throw InvariantError("topic registry holds " + std::to_string(topics_.size()) +
                         " topics, expected " + std::to_string(n));
  }
}

TopicRegistry TopicRegistry::from_json(const Json& j) {
  const Json* list = &j;
  if (j.is_object()) {
    if (!j.contains("topics")) throw ParseError("topic registry object lacks 'topics'");
    list = &j.at("topics");
  }
  if (!list->is_array()) throw ParseError("topic registry must be an array");
  TopicRegistry reg;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& item = (*list)[i];
    if (item.is_string()) {
      reg.add(item.get<std::string>());
    } else if (item.is_object() && item.contains("id")) {
      const auto id = item.at("id").get<std::string>();
      reg.add(CounselingTopic{text::normalize_key(id), item.value("display_name", text::trim(id))});
    } else {
      throw ParseError("bad topic entry", "topics[" + std::to_string(i) + "]");
    }
  }
  return reg;
}

std::string_view to_string(School s) {
  switch (s) {
    case School::psychodynamic: return "Psychodynamic";
    case School::cognitive_behavioral: return "Cognitive-Behavioral";
    case School::humanistic: return "Humanistic";
    case School::postmodern: return "Postmodern";
    case School::other: break;
  }
  return "Other";
}

School school_from_string(std::string_view s) {
  const auto k = text::normalize_key(s);
  if (k == "psychodynamic") return School::psychodynamic;
  if (k == "cognitive-behavioral" || k == "cognitive behavioral") return School::cognitive_behavioral;
  if (k == "humanistic") return School::humanistic;
  if (k == "postmodern") return School::postmodern;
  return School::other;
}

std::string_view to_string(Trait t) {
  switch (t) {
    case Trait::openness: return "openness";
    case Trait::conscientiousness: return "conscientiousness";
    case Trait::extraversion: return "extraversion";
    case Trait::agreeableness: return "agreeableness";
    case Trait::neuroticism: break;
  }
  return "neuroticism";
}

std::string_view to_string(Level l) {
  switch (l) {
    case Level::low: return "low";
    case Level::medium: return "medium";
    case Level::high: break;
  }
  return "high";
}

std::optional<Level> level_from_string(std::string_view s) {
  const auto k = text::normalize_key(s);
  if (k == "low") return Level::low;
  if (k == "medium" || k == "moderate") return Level::medium;
  if (k == "high") return Level::high;
  return std::nullopt;
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::alternation: return "alternation";
    case ViolationKind::first_role: return "first_role";
    case ViolationKind::last_role: return "last_role";
    case ViolationKind::empty_content: return "empty_content";
    case ViolationKind::min_length: break;
  }
  return "min_length";
}

bool ValidationReport::has(ViolationKind k) const {
  for (const auto& v : violations) {
    if (v.kind == k) return true;
  }
  return false;
}

std::string ValidationReport::describe() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << "- " << to_string(v.kind) << " at index " << v.index;
    if (!v.detail.empty()) os << ": " << v.detail;
    os << '\n';
  }
  return os.str();
}

ValidationReport validate_transcript(const Transcript& t, const ValidationRules& rules) {
  ValidationReport r;
  if (t.size() < rules.min_length) {
    r.violations.push_back({ViolationKind::min_length, t.size(),
                            "transcript has " + std::to_string(t.size()) + " utterances, minimum is " +
                                std::to_string(rules.min_length)});
  }
  if (t.empty()) return r;
  if (t.front().role != Role::client) {
    r.violations.push_back({ViolationKind::first_role, 0, "first utterance must be the client's"});
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (text::trim(t[i].content).empty()) {
      r.violations.push_back({ViolationKind::empty_content, i, "empty utterance"});
    }
    if (i > 0 && t[i].role == t[i - 1].role) {
      r.violations.push_back({ViolationKind::alternation, i,
                              "two consecutive " + std::string(to_string(t[i].role)) + " utterances"});
    }
  }
  if (rules.counselor_last && t.back().role != Role::counselor) {
    r.violations.push_back({ViolationKind::last_role, t.size() - 1, "last utterance must be the counselor's"});
  }
  return r;
}

ValidationReport validate_dialogue(const MultiTurnDialogue& d, std::size_t min_length) {
  return validate_transcript(d.transcript, ValidationRules::synthetic(min_length));
}

ValidationReport validate_dialogue(const CounselingCase& c) {
  return validate_transcript(c.transcript, ValidationRules::counseling_case());
}

std::vector<std::string> unresolved_provenance(const std::vector<MultiTurnDialogue>& dialogues,
                                               const std::vector<SingleTurnDialogue>& seeds) {
  std::set<std::string> known;
  for (const auto& s : seeds) known.insert(s.id);
  std::vector<std::string> bad;
  for (const auto& d : dialogues) {
    if (!d.provenance || !known.count(d.provenance->source_single_turn_id)) bad.push_back(d.id);
  }
  return bad;
}

CounselingCase sanitize_case(CounselingCase c) {
  static const std::regex email(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})");
  static const std::regex digits(R"(\d{7,})");
  for (auto& u : c.transcript) {
    auto s = std::regex_replace(u.content, email, "[EMAIL]");
    s = std::regex_replace(s, digits, "[NUMBER]");
    u.content = text::trim(s);
  }
  reindex(c.transcript);
  c.sanitized = true;
  return c;
}

}  // namespace twinsynth
