#include "twinsynth/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <ostream>

#include "twinsynth/corpus_io.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {

Json DatasetStats::to_json() const {
  return {{"size", size},
          {"not_avg", not_avg},
          {"loc_avg", loc_avg},
          {"lop_avg", lop_avg},
          {"client_utterances", client_utterances},
          {"counselor_utterances", counselor_utterances}};
}

DatasetStats compute_stats(const std::vector<MultiTurnDialogue>& corpus) {
  DatasetStats s;
  s.size = corpus.size();
  std::size_t utterances = 0;
  std::size_t client_chars = 0;
  std::size_t counselor_chars = 0;
  for (const auto& d : corpus) {
    utterances += d.transcript.size();
    for (const auto& u : d.transcript) {
      const auto len = text::char_length(u.content);
      if (u.role == Role::client) {
        ++s.client_utterances;
        client_chars += len;
      } else {
        ++s.counselor_utterances;
        counselor_chars += len;
      }
    }
  }
  if (s.size) s.not_avg = static_cast<double>(utterances) / static_cast<double>(s.size);
  if (s.client_utterances) s.loc_avg = static_cast<double>(client_chars) / static_cast<double>(s.client_utterances);
  if (s.counselor_utterances) {
    s.lop_avg = static_cast<double>(counselor_chars) / static_cast<double>(s.counselor_utterances);
  }
  return s;
}

std::vector<SingleTurnDialogue> filter_by_richness(const std::vector<SingleTurnDialogue>& seeds,
                                                   const std::map<std::string, int>& scores, int threshold) {
  std::vector<SingleTurnDialogue> out;
  for (const auto& s : seeds) {
    auto it = scores.find(s.id);
    if (it == scores.end()) throw MissingScoreError(s.id);
    if (it->second >= threshold) out.push_back(s);
  }
  return out;
}

namespace {

// std::uniform_int_distribution differs across standard libraries; this
// rejection sampler does not.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

Split split_dataset(const std::vector<MultiTurnDialogue>& corpus, std::size_t per_topic_test, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_topic;
  for (std::size_t i = 0; i < corpus.size(); ++i) by_topic[corpus[i].topic.id].push_back(i);

  std::vector<bool> in_test(corpus.size(), false);
  std::mt19937_64 rng(seed);
  for (auto& [topic, idx] : by_topic) {
    if (idx.size() < per_topic_test) throw InsufficientTopicError(topic, idx.size(), per_topic_test);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_below(rng, i)]);
    for (std::size_t k = 0; k < per_topic_test; ++k) in_test[idx[k]] = true;
  }
  Split out;
  for (std::size_t i = 0; i < corpus.size(); ++i) (in_test[i] ? out.test : out.train).push_back(corpus[i]);
  return out;
}

std::vector<MiftSample> export_mift(const MultiTurnDialogue& d) {
  std::vector<MiftSample> out;
  for (std::size_t i = 0; i < d.transcript.size(); ++i) {
    if (d.transcript[i].role != Role::counselor) continue;
    Transcript ctx(d.transcript.begin(), d.transcript.begin() + static_cast<std::ptrdiff_t>(i));
    out.push_back({std::move(ctx), d.transcript[i].content, d.id, i, Json::object()});
  }
  return out;
}

std::size_t export_mift_corpus(const std::vector<MultiTurnDialogue>& corpus, std::ostream& out,
                               const MiftExportOptions& opts) {
  std::size_t n = 0;
  for (const auto& d : corpus) {
    for (auto& s : export_mift(d)) {
      if (opts.system_prompt) s.extra["system"] = *opts.system_prompt;
      out << to_json(s).dump() << '\n';
      ++n;
    }
  }
  if (!out) throw IoError("failed writing MIFT records");
  return n;
}

std::size_t export_mift_corpus(const std::vector<MultiTurnDialogue>& corpus, const std::string& path,
                               const MiftExportOptions& opts) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return export_mift_corpus(corpus, f, opts);
}

}  // namespace twinsynth
