#pragma once

// LLM-as-judge scoring: every judge rates a subject on one rubric dimension
// and the verdict is the mean of their integer scores.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "twinsynth/corpus.hpp"
#include "twinsynth/prompt_template.hpp"
#include "twinsynth/provider.hpp"

namespace twinsynth {

enum class JudgeDimension {
  EmoE,
  CogE,
  Con,
  Sta,
  Saf,
  LinguisticSimilarity,
  TherapySimilarity,
  ConExpert,
  StaExpert,
  Rel,
  App,
  Flu,
};

struct Scale {
  int lo = 0;
  int hi = 0;
  bool contains(long v) const { return v >= lo && v <= hi; }
};

std::string_view to_string(JudgeDimension d);
JudgeDimension judge_dimension_from_string(std::string_view s);  // throws UsageError
Scale scale_of(JudgeDimension d);
// Template stage name, e.g. "judge_emoe".
std::string judge_stage(JudgeDimension d);
const std::vector<JudgeDimension>& all_judge_dimensions();

// Last in-scale integer following "Score:". ParseError when no such pattern
// exists, OutOfScaleError when every match is outside the scale.
int parse_judge_score(std::string_view reply, Scale scale);

struct JudgeVerdict {
  JudgeDimension dimension = JudgeDimension::EmoE;
  Scale scale;
  std::vector<int> scores;  // one per judge, in judge order
  long sum = 0;

  double mean() const { return scores.empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(scores.size()); }
  Json to_json() const;
};

// Each judge gets one retry when its reply does not parse.
JudgeVerdict judge_score(const SlotMap& subject, JudgeDimension dim, const std::vector<Gateway*>& judges,
                         const PromptTemplate& tpl, std::uint64_t seed);

struct JudgeSubject {
  std::string id;
  SlotMap slots;
};

// [{id, <slot>: text, ...}]; every non-id string field becomes a slot.
std::vector<JudgeSubject> judge_subjects_from_json(const Json& j);

struct JudgedSubject {
  std::string id;
  JudgeVerdict verdict;
};

// Subjects run in parallel; results come back in input order.
std::vector<JudgedSubject> judge_all(const std::vector<JudgeSubject>& subjects, JudgeDimension dim,
                                     const std::vector<Gateway*>& judges, const PromptTemplate& tpl,
                                     std::uint64_t global_seed);

Json judged_to_json(const std::vector<JudgedSubject>& judged);
// id,dimension,judge_1..judge_k,mean with the mean at two decimals.
std::string judged_to_csv(const std::vector<JudgedSubject>& judged);

}  // namespace twinsynth
