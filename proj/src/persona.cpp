#include "twinsynth/persona.hpp"

#include <optional>
#include <regex>
#include <set>

#include "twinsynth/corpus_io.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {
namespace {

std::string_view strip_fence(std::string_view s) {
  const auto open = s.find("```");
  if (open == std::string_view::npos) return s;
  auto body_start = s.find('\n', open);
  if (body_start == std::string_view::npos) return s;
  ++body_start;
  const auto close = s.find("```", body_start);
  return s.substr(body_start, close == std::string_view::npos ? std::string_view::npos : close - body_start);
}

// The outermost {...} span, honoring string literals.
std::string_view object_span(std::string_view s) {
  const auto start = s.find('{');
  if (start == std::string_view::npos) throw ParseError("no JSON object in personality reply");
  int depth = 0;
  bool in_str = false;
  bool esc = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (esc) {
        esc = false;
      } else if (c == '\\') {
        esc = true;
      } else if (c == '"') {
        in_str = false;
      }
      continue;
    }
    if (c == '"') {
      in_str = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return s.substr(start, i - start + 1);
    }
  }
  throw ParseError("unterminated JSON object in personality reply", "offset " + std::to_string(start));
}

Json parse_no_duplicates(std::string_view body) {
  std::vector<std::set<std::string>> keys;
  std::string dup;
  Json::parser_callback_t cb = [&](int, Json::parse_event_t ev, Json& parsed) {
    switch (ev) {
      case Json::parse_event_t::object_start:
        keys.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        if (!keys.empty()) keys.pop_back();
        break;
      case Json::parse_event_t::key:
        if (!keys.empty() && !keys.back().insert(text::ascii_lower(parsed.get<std::string>())).second && dup.empty()) {
          dup = parsed.get<std::string>();
        }
        break;
      default:
        break;
    }
    return true;
  };
  Json j;
  try {
    j = Json::parse(body.begin(), body.end(), cb);
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed personality JSON", "byte " + std::to_string(e.byte));
  }
  if (!dup.empty()) throw ParseError("duplicate key '" + dup + "'", dup);
  return j;
}

}  // namespace

PersonalityProfile parse_personality(std::string_view text) {
  const Json raw = parse_no_duplicates(object_span(strip_fence(text)));
  Json lowered = Json::object();
  for (auto it = raw.begin(); it != raw.end(); ++it) {
    const auto key = text::ascii_lower(text::trim(it.key()));
    if (!it->is_object()) {
      lowered[key] = *it;
      continue;
    }
    Json inner = Json::object();
    for (auto jt = it->begin(); jt != it->end(); ++jt) inner[text::ascii_lower(text::trim(jt.key()))] = *jt;
    lowered[key] = inner;
  }
  for (Trait t : kAllTraits) {
    if (!lowered.contains(std::string(to_string(t)))) {
      throw ParseError("missing dimension '" + std::string(to_string(t)) + "'", std::string(to_string(t)));
    }
  }
  return personality_from_json(lowered);
}

std::string serialize_personality(const PersonalityProfile& p) { return to_json(p).dump(2); }

PersonaResult simulate_personality(const SingleTurnDialogue& st, Gateway& gw, const PromptTemplate& tpl,
                                   std::uint64_t seed, int parse_attempts) {
  const auto prompt = render_template(tpl, {{"title", st.title}, {"detail", st.detail}, {"topic", st.topic.display_name}});
  std::optional<ParseError> last;
  for (int attempt = 0; attempt < std::max(1, parse_attempts); ++attempt) {
    const auto resp = gw.ask(prompt, "persona", seed);
    try {
      return {parse_personality(resp.text), resp.text};
    } catch (const ParseError& e) {
      last = e;
    }
  }
  throw *last;
}

int parse_richness_score(std::string_view text) {
  static const std::regex labelled(R"((?:score|rating)\s*[:=]\s*(-?\d+))", std::regex::icase);
  static const std::regex number(R"(-?\d+)");
  const std::string s(text);
  std::string found;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), labelled); it != std::sregex_iterator(); ++it) {
    found = (*it)[1];
  }
  if (found.empty()) {
    std::smatch m;
    if (std::regex_search(s, m, number)) found = m[0];
  }
  if (found.empty()) throw ParseError("no integer score in reply '" + text::trim(s) + "'");
  const bool huge = found.size() > 3;
  const long v = huge ? 0 : std::stol(found);
  if (huge || v < 0 || v > 10) throw ParseError("score " + found + " outside [0, 10]");
  return static_cast<int>(v);
}

int score_personality_richness(const SingleTurnDialogue& st, Gateway& gw, const PromptTemplate& tpl,
                               std::uint64_t seed) {
  const auto prompt = render_template(tpl, {{"title", st.title}, {"detail", st.detail}, {"topic", st.topic.display_name}});
  return parse_richness_score(gw.ask(prompt, "richness", seed).text);
}

}  // namespace twinsynth
