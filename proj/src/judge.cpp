#include "twinsynth/judge.hpp"

#include <algorithm>
#include <regex>

#include <fmt/format.h>

#include "twinsynth/errors.hpp"
#include "twinsynth/parallel.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {

namespace {

struct DimInfo {
  JudgeDimension dim;
  std::string_view name;
  Scale scale;
};

constexpr DimInfo kDims[] = {
    {JudgeDimension::EmoE, "EmoE", {0, 3}},
    {JudgeDimension::CogE, "CogE", {0, 3}},
    {JudgeDimension::Con, "Con", {0, 3}},
    {JudgeDimension::Sta, "Sta", {0, 3}},
    {JudgeDimension::Saf, "Saf", {0, 1}},
    {JudgeDimension::LinguisticSimilarity, "LinguisticSimilarity", {0, 100}},
    {JudgeDimension::TherapySimilarity, "TherapySimilarity", {0, 100}},
    {JudgeDimension::ConExpert, "ConExpert", {0, 10}},
    {JudgeDimension::StaExpert, "StaExpert", {0, 10}},
    {JudgeDimension::Rel, "Rel", {0, 10}},
    {JudgeDimension::App, "App", {0, 10}},
    {JudgeDimension::Flu, "Flu", {0, 1}},
};

const DimInfo& info(JudgeDimension d) {
  for (const auto& i : kDims) {
    if (i.dim == d) return i;
  }
  throw InvariantError("unregistered judge dimension");
}

}  // namespace

std::string_view to_string(JudgeDimension d) { return info(d).name; }

JudgeDimension judge_dimension_from_string(std::string_view s) {
  const auto k = text::ascii_lower(text::trim(s));
  for (const auto& i : kDims) {
    if (text::ascii_lower(i.name) == k) return i.dim;
  }
  throw UsageError("unknown judge dimension '" + std::string(s) + "'");
}

Scale scale_of(JudgeDimension d) { return info(d).scale; }

std::string judge_stage(JudgeDimension d) { return "judge_" + text::ascii_lower(info(d).name); }

const std::vector<JudgeDimension>& all_judge_dimensions() {
  static const std::vector<JudgeDimension> dims = [] {
    std::vector<JudgeDimension> v;
    for (const auto& i : kDims) v.push_back(i.dim);
    return v;
  }();
  return dims;
}

int parse_judge_score(std::string_view reply, Scale scale) {
  static const std::regex pattern(R"(score\s*(?::|：)\s*(-?\d+))", std::regex::icase);
  const std::string s(reply);
  std::optional<long> last_in, last_any;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), pattern); it != std::sregex_iterator(); ++it) {
    const std::string digits = (*it)[1];
    const long v = digits.size() > 9 ? (digits.front() == '-' ? -999999999L : 999999999L) : std::stol(digits);
    last_any = v;
    if (scale.contains(v)) last_in = v;
  }
  if (last_in) return static_cast<int>(*last_in);
  if (last_any) throw OutOfScaleError(static_cast<int>(*last_any), scale.lo, scale.hi);
  throw ParseError("judge reply has no 'Score: <int>' line");
}

Json JudgeVerdict::to_json() const {
  return {{"dimension", std::string(to_string(dimension))},
          {"scale", {scale.lo, scale.hi}},
          {"scores", scores},
          {"mean", mean()}};
}

JudgeVerdict judge_score(const SlotMap& subject, JudgeDimension dim, const std::vector<Gateway*>& judges,
                         const PromptTemplate& tpl, std::uint64_t seed) {
  if (judges.empty()) throw ConfigError("judge scoring needs at least one judge");
  const auto prompt = render_template(tpl, subject);
  const auto tag = "judge_" + text::ascii_lower(to_string(dim));
  JudgeVerdict v{dim, scale_of(dim), {}, 0};
  for (Gateway* judge : judges) {
    int score = 0;
    try {
      score = parse_judge_score(judge->ask(prompt, tag, seed).text, v.scale);
    } catch (const ParseError&) {
      const auto retry = prompt + "\n\nEnd your answer with a final line of the form 'Score: <integer>'.";
      score = parse_judge_score(judge->ask(retry, tag, seed).text, v.scale);
    }
    v.scores.push_back(score);
    v.sum += score;
  }
  return v;
}

std::vector<JudgeSubject> judge_subjects_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("judge subjects must be a JSON array");
  std::vector<JudgeSubject> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_object()) throw ParseError("subject must be an object", "record " + std::to_string(i));
    JudgeSubject s{e.value("id", std::to_string(i)), {}};
    for (auto it = e.begin(); it != e.end(); ++it) {
      if (it.key() != "id" && it->is_string()) s.slots[it.key()] = it->get<std::string>();
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<JudgedSubject> judge_all(const std::vector<JudgeSubject>& subjects, JudgeDimension dim,
                                     const std::vector<Gateway*>& judges, const PromptTemplate& tpl,
                                     std::uint64_t global_seed) {
  int workers = 1;
  for (auto* g : judges) workers = std::max(workers, g->options().concurrency);
  return parallel_map(subjects.size(), workers, [&](std::size_t i) {
    const auto& s = subjects[i];
    try {
      return JudgedSubject{s.id, judge_score(s.slots, dim, judges, tpl, text::derive_seed(global_seed, s.id))};
    } catch (const Error&) {
      std::throw_with_nested(ItemFailure("judging", s.id));
    }
  });
}

Json judged_to_json(const std::vector<JudgedSubject>& judged) {
  Json items = Json::array();
  double total = 0;
  for (const auto& j : judged) {
    Json e = j.verdict.to_json();
    e["id"] = j.id;
    items.push_back(std::move(e));
    total += j.verdict.mean();
  }
  return {{"items", items}, {"mean", judged.empty() ? 0.0 : total / static_cast<double>(judged.size())}};
}

std::string judged_to_csv(const std::vector<JudgedSubject>& judged) {
  std::size_t k = 0;
  for (const auto& j : judged) k = std::max(k, j.verdict.scores.size());
  std::string out = "id,dimension";
  for (std::size_t i = 1; i <= k; ++i) out += ",judge_" + std::to_string(i);
  out += ",mean\n";
  for (const auto& j : judged) {
    out += j.id + "," + std::string(to_string(j.verdict.dimension));
    for (std::size_t i = 0; i < k; ++i) {
      out += ",";
      if (i < j.verdict.scores.size()) out += std::to_string(j.verdict.scores[i]);
    }
    out += fmt::format(",{:.2f}\n", j.verdict.mean());
  }
  return out;
}

}  // namespace twinsynth
