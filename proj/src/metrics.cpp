#include "twinsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "twinsynth/embedding.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/text.hpp"

namespace twinsynth {

std::string_view to_string(TokenizerMode m) {
  switch (m) {
    case TokenizerMode::whitespace: return "whitespace";
    case TokenizerMode::cjk_char: return "cjk_char";
    case TokenizerMode::provided: return "provided";
  }
  return "?";
}

TokenizerMode tokenizer_mode_from_string(std::string_view s) {
  if (s == "whitespace") return TokenizerMode::whitespace;
  if (s == "cjk_char") return TokenizerMode::cjk_char;
  if (s == "provided") return TokenizerMode::provided;
  throw UsageError("unknown tokenizer '" + std::string(s) + "'");
}

Tokens tokenize(std::string_view s, TokenizerMode mode) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char32_t cp : text::decode_utf8(s)) {
    if (text::is_unicode_space(cp)) {
      flush();
    } else if (mode == TokenizerMode::cjk_char && text::is_cjk(cp)) {
      flush();
      text::append_utf8(cur, cp);
      flush();
    } else {
      text::append_utf8(cur, cp);
    }
  }
  flush();
  return out;
}

namespace {

std::map<std::vector<std::string>, std::size_t> ngram_counts(const Tokens& t, int n) {
  std::map<std::vector<std::string>, std::size_t> m;
  const auto k = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + k <= t.size(); ++i) ++m[Tokens(t.begin() + i, t.begin() + i + k)];
  return m;
}

std::size_t ngram_total(const Tokens& t, int n) {
  return t.size() >= static_cast<std::size_t>(n) ? t.size() - static_cast<std::size_t>(n) + 1 : 0;
}

std::size_t clipped_overlap(const Tokens& cand, const Tokens& ref, int n) {
  const auto c = ngram_counts(cand, n);
  const auto r = ngram_counts(ref, n);
  std::size_t overlap = 0;
  for (const auto& [g, k] : c) {
    if (auto it = r.find(g); it != r.end()) overlap += std::min(k, it->second);
  }
  return overlap;
}

double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

}  // namespace

PRF rouge_n(const Tokens& cand, const Tokens& ref, int n) {
  if (n < 1) throw InvariantError("ROUGE-N needs n >= 1");
  const auto nc = ngram_total(cand, n);
  const auto nr = ngram_total(ref, n);
  if (nc == 0 || nr == 0) return {};
  const auto overlap = static_cast<double>(clipped_overlap(cand, ref, n));
  const double p = overlap / static_cast<double>(nc);
  const double r = overlap / static_cast<double>(nr);
  return {p, r, harmonic(p, r)};
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PRF rouge_l(const Tokens& cand, const Tokens& ref, RougeLOptions opts) {
  if (cand.empty() || ref.empty()) return {};
  const auto l = static_cast<double>(lcs_length(cand, ref));
  const double p = l / static_cast<double>(cand.size());
  const double r = l / static_cast<double>(ref.size());
  if (!opts.ratio_beta || r == 0) return {p, r, harmonic(p, r)};
  const double b2 = (p / r) * (p / r);
  return {p, r, (1 + b2) * p * r / (r + b2 * p)};
}

double bleu4(const Tokens& cand, const Tokens& ref) {
  if (cand.empty()) return 0.0;
  double log_sum = 0;
  for (int n = 1; n <= 4; ++n) {
    const auto total = ngram_total(cand, n);
    const auto match = clipped_overlap(cand, ref, n);
    if (match == 0) {
      if (n == 1) return 0.0;
      log_sum += std::log(1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(total, 1))));
    } else {
      log_sum += std::log(static_cast<double>(match) / static_cast<double>(total));
    }
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double bp = std::min(1.0, std::exp(1.0 - r / c));
  return bp * std::exp(log_sum / 4.0);
}

namespace {

double norm(const Vector& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

PRF bert_score_f(const std::vector<Vector>& cand, const std::vector<Vector>& ref) {
  if (cand.empty() || ref.empty()) return {};
  const auto dim = cand.front().size();
  std::vector<double> nc, nr;
  auto check = [&](const std::vector<Vector>& side, std::vector<double>& norms, const char* name) {
    for (std::size_t i = 0; i < side.size(); ++i) {
      if (side[i].size() != dim) {
        throw DimensionMismatchError(std::string(name) + " vector " + std::to_string(i) + " has dimension " +
                                     std::to_string(side[i].size()) + ", expected " + std::to_string(dim));
      }
      const double n = norm(side[i]);
      if (n == 0) throw ZeroVectorError(std::string(name) + " vector " + std::to_string(i) + " is zero");
      norms.push_back(n);
    }
  };
  check(cand, nc, "candidate");
  check(ref, nr, "reference");

  std::vector<double> best_c(cand.size(), -1.0), best_r(ref.size(), -1.0);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < dim; ++k) dot += cand[i][k] * ref[j][k];
      const double cos = dot / (nc[i] * nr[j]);
      best_c[i] = std::max(best_c[i], cos);
      best_r[j] = std::max(best_r[j], cos);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double p = mean(best_c);
  const double r = mean(best_r);
  return {p, r, harmonic(p, r)};
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j{{"rouge1", rouge1}, {"rouge2", rouge2}, {"rougeL", rougeL}, {"bleu4", bleu4}, {"pairs", pairs}};
  j["f_bert"] = f_bert ? nlohmann::json(*f_bert) : nlohmann::json(nullptr);
  return j;
}

std::string MetricReport::to_csv() const {
  std::string out = "rouge1,rouge2,rougeL,bleu4,f_bert\n";
  out += fmt::format("{:.2f},{:.2f},{:.2f},{:.2f},", rouge1 * 100, rouge2 * 100, rougeL * 100, bleu4 * 100);
  if (f_bert) out += fmt::format("{:.2f}", *f_bert * 100);
  return out + "\n";
}

MetricReport evaluate_model_outputs(const std::vector<TextPair>& pairs, TokenizerMode mode,
                                    EmbeddingProvider* embedder) {
  if (pairs.empty()) throw InvariantError("no generated/reference pairs to evaluate");
  MetricReport rep;
  rep.pairs = pairs.size();
  double fb = 0;
  for (const auto& p : pairs) {
    const auto c = tokenize(p.generated, mode);
    const auto r = tokenize(p.reference, mode);
    rep.rouge1 += rouge_n(c, r, 1).f;
    rep.rouge2 += rouge_n(c, r, 2).f;
    rep.rougeL += rouge_l(c, r).f;
    rep.bleu4 += bleu4(c, r);
    if (embedder) fb += bert_score_f(embedder->embed(c), embedder->embed(r)).f;
  }
  const auto n = static_cast<double>(pairs.size());
  rep.rouge1 /= n;
  rep.rouge2 /= n;
  rep.rougeL /= n;
  rep.bleu4 /= n;
  if (embedder) rep.f_bert = fb / n;
  return rep;
}

std::vector<TextPair> pairs_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("pairs file must be a JSON array");
  std::vector<TextPair> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_object() || !e.contains("generated") || !e.contains("reference") || !e["generated"].is_string() ||
        !e["reference"].is_string()) {
      throw ParseError("pair needs string fields 'generated' and 'reference'", "record " + std::to_string(i));
    }
    out.push_back({e["generated"].get<std::string>(), e["reference"].get<std::string>()});
  }
  return out;
}

}  // namespace twinsynth
