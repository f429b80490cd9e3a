#pragma once

// Reference-based automatic metrics: ROUGE-N, ROUGE-L, sentence BLEU-4 and
// embedding F_BERT, plus the tokenizers they run on.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace twinsynth {

class EmbeddingProvider;

using Tokens = std::vector<std::string>;

enum class TokenizerMode { whitespace, cjk_char, provided };
std::string_view to_string(TokenizerMode m);
TokenizerMode tokenizer_mode_from_string(std::string_view s);  // throws UsageError

// whitespace: split on Unicode whitespace. cjk_char: every CJK code point is
// its own token, other runs split on whitespace. provided: the text is
// already tokenized with single spaces, so it is split on whitespace too.
Tokens tokenize(std::string_view text, TokenizerMode mode);

struct PRF {
  double precision = 0;
  double recall = 0;
  double f = 0;
};

PRF rouge_n(const Tokens& cand, const Tokens& ref, int n);

struct RougeLOptions {
  // false: F1. true: F with beta = P/R, the original LCS-based weighting.
  bool ratio_beta = false;
};
PRF rouge_l(const Tokens& cand, const Tokens& ref, RougeLOptions opts = {});

std::size_t lcs_length(const Tokens& a, const Tokens& b);

// Uniform weights over 1..4-gram clipped precisions. A zero numerator for
// n >= 2 is replaced by 1 / (2 * candidate n-gram count). Zero when the
// candidate is empty or shares no unigram with the reference.
double bleu4(const Tokens& cand, const Tokens& ref);

using Vector = std::vector<double>;

// Greedy cosine matching, no IDF weighting, no rescaling. Throws
// DimensionMismatchError or ZeroVectorError. Empty sides give zeros.
PRF bert_score_f(const std::vector<Vector>& cand, const std::vector<Vector>& ref);

struct MetricReport {
  double rouge1 = 0;
  double rouge2 = 0;
  double rougeL = 0;
  double bleu4 = 0;
  std::optional<double> f_bert;  // absent without an embedder
  std::size_t pairs = 0;

  nlohmann::json to_json() const;
  // Header plus one row, values x100 with two decimals.
  std::string to_csv() const;
};

struct TextPair {
  std::string generated;
  std::string reference;
};

// Macro average over pairs. Throws InvariantError for an empty list.
MetricReport evaluate_model_outputs(const std::vector<TextPair>& pairs, TokenizerMode mode,
                                    EmbeddingProvider* embedder = nullptr);

std::vector<TextPair> pairs_from_json(const nlohmann::json& j);

}  // namespace twinsynth
