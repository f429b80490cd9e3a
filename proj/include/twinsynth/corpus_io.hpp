#pragma once

// JSON persistence for corpus collections. Every collection is one JSON
// document holding a top-level array of records, except MIFT samples which
// are line-delimited (one record per line) so trainers can stream them.

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "twinsynth/corpus.hpp"

namespace twinsynth {

enum class CorpusKind { single_turn, case_transcript, multi_turn, mift, ratings };

std::string_view to_string(CorpusKind k);
CorpusKind corpus_kind_from_string(std::string_view s);  // throws UsageError

using Collection = std::variant<std::vector<SingleTurnDialogue>, std::vector<CounselingCase>,
                                std::vector<MultiTurnDialogue>, std::vector<MiftSample>,
                                std::vector<RatingRecord>>;

// Record <-> JSON. The from_* functions throw ParseError on shape errors and
// InvariantError on type-invariant breaches; `where` is prefixed to messages.
Json to_json(const SingleTurnDialogue& d);
Json to_json(const CounselingCase& c);
Json to_json(const MultiTurnDialogue& d);
Json to_json(const MiftSample& s);
Json to_json(const RatingRecord& r);
Json to_json(const LinguisticStyleProfile& p);
Json to_json(const PersonalityProfile& p);
Json to_json(const TherapyTechniqueEntry& e);
Json messages_to_json(const Transcript& t);

SingleTurnDialogue single_turn_from_json(const Json& j, const std::string& where = {});
CounselingCase case_from_json(const Json& j, const std::string& where = {});
MultiTurnDialogue multi_turn_from_json(const Json& j, const std::string& where = {});
MiftSample mift_from_json(const Json& j, const std::string& where = {});
RatingRecord rating_from_json(const Json& j, const std::string& where = {});
LinguisticStyleProfile style_from_json(const Json& j, const std::string& where = {});
PersonalityProfile personality_from_json(const Json& j, const std::string& where = {});
TherapyTechniqueEntry technique_from_json(const Json& j, const std::string& where = {});
Transcript messages_from_json(const Json& j, const std::string& where = {});

// Parses a whole document. The JSON parse error location is reported as
// "line L, column C".
Json parse_json_document(std::string_view text, const std::string& source = {});
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);
std::string read_text_file(const std::string& path);

// When `registry` is given, every record's topic must resolve in it.
Collection parse_corpus(std::string_view text, CorpusKind kind, const TopicRegistry* registry = nullptr);
Collection load_corpus(const std::string& path, CorpusKind kind, const TopicRegistry* registry = nullptr);

std::string serialize_corpus(const Collection& c);
void save_corpus(const Collection& c, const std::string& path);

template <typename T>
std::vector<T> load_as(const std::string& path, CorpusKind kind, const TopicRegistry* registry = nullptr) {
  return std::get<std::vector<T>>(load_corpus(path, kind, registry));
}

}  // namespace twinsynth
