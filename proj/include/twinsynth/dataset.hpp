#pragma once

// Corpus statistics, richness filtering, per-topic train/test splitting and
// multi-turn instruction-tuning export.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twinsynth/corpus.hpp"

namespace twinsynth {

// Lengths are Unicode code points after trimming surrounding whitespace.
// The utterance counts make the averages re-combinable across corpora.
struct DatasetStats {
  std::size_t size = 0;
  double not_avg = 0;  // utterances per dialogue
  double loc_avg = 0;  // client utterance length
  double lop_avg = 0;  // counselor utterance length
  std::size_t client_utterances = 0;
  std::size_t counselor_utterances = 0;

  Json to_json() const;
};

DatasetStats compute_stats(const std::vector<MultiTurnDialogue>& corpus);

// Keeps seeds scoring at least `threshold`, in input order. Throws
// MissingScoreError for a seed without a score.
std::vector<SingleTurnDialogue> filter_by_richness(const std::vector<SingleTurnDialogue>& seeds,
                                                   const std::map<std::string, int>& scores, int threshold);

struct Split {
  std::vector<MultiTurnDialogue> train;
  std::vector<MultiTurnDialogue> test;
};

// Exactly `per_topic_test` dialogues of every topic go to test, drawn by a
// seeded shuffle of that topic's dialogues. Both halves keep corpus order.
// Throws InsufficientTopicError when a topic is too small.
Split split_dataset(const std::vector<MultiTurnDialogue>& corpus, std::size_t per_topic_test, std::uint64_t seed);

// One sample per counselor utterance.
std::vector<MiftSample> export_mift(const MultiTurnDialogue& d);

struct MiftExportOptions {
  std::optional<std::string> system_prompt;  // stored as a "system" field on every record
};

// Line-delimited JSON, one record per sample. Returns the record count.
std::size_t export_mift_corpus(const std::vector<MultiTurnDialogue>& corpus, std::ostream& out,
                               const MiftExportOptions& opts = {});
std::size_t export_mift_corpus(const std::vector<MultiTurnDialogue>& corpus, const std::string& path,
                               const MiftExportOptions& opts = {});

}  // namespace twinsynth
