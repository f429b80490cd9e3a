#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "twinsynth/embedding.hpp"
#include "twinsynth/errors.hpp"
#include "twinsynth/metrics.hpp"
#include "oracles.hpp"

using namespace twinsynth;
using namespace twinsynth::oracles;

namespace {

Tokens T(std::initializer_list<const char*> xs) { return Tokens(xs.begin(), xs.end()); }

}  // namespace

// ---- tokenizer -------------------------------------------------------------

TEST(Tokenize, Modes) {
  EXPECT_EQ(tokenize("a b", TokenizerMode::whitespace), T({"a", "b"}));
  EXPECT_EQ(tokenize("你好 ok", TokenizerMode::cjk_char), T({"你", "好", "ok"}));
  EXPECT_EQ(tokenize("你好 ok", TokenizerMode::whitespace), T({"你好", "ok"}));
  EXPECT_EQ(tokenize("我想hello世界", TokenizerMode::cjk_char), T({"我", "想", "hello", "世", "界"}));
  EXPECT_EQ(tokenize("a　b\n c", TokenizerMode::whitespace), T({"a", "b", "c"}));
  EXPECT_EQ(tokenize("心理 咨询 师", TokenizerMode::provided), T({"心理", "咨询", "师"}));
  EXPECT_TRUE(tokenize("", TokenizerMode::cjk_char).empty());
  EXPECT_EQ(tokenizer_mode_from_string("cjk_char"), TokenizerMode::cjk_char);
  EXPECT_THROW(tokenizer_mode_from_string("jieba"), UsageError);
}

// ---- ROUGE -----------------------------------------------------------------

TEST(Rouge, HandCountedExamples) {
  const auto r1 = rouge_n(T({"a", "b", "c"}), T({"a", "c", "d"}), 1);
  EXPECT_NEAR(r1.precision, 2.0 / 3, 1e-12);
  EXPECT_NEAR(r1.recall, 2.0 / 3, 1e-12);
  EXPECT_NEAR(r1.f, 2.0 / 3, 1e-12);
  EXPECT_DOUBLE_EQ(rouge_n(T({"a", "b"}), T({"a", "b"}), 2).f, 1.0);
  EXPECT_DOUBLE_EQ(rouge_n(T({"a", "b"}), T({"c", "d"}), 1).f, 0.0);
  EXPECT_DOUBLE_EQ(rouge_n(T({"a"}), T({"a"}), 2).f, 0.0);
  // clipping: "a a a" against "a" overlaps once
  EXPECT_NEAR(rouge_n(T({"a", "a", "a"}), T({"a"}), 1).precision, 1.0 / 3, 1e-12);
  EXPECT_THROW(rouge_n(T({"a"}), T({"a"}), 0), InvariantError);
}

TEST(Rouge, LcsExamples) {
  const auto l = rouge_l(T({"a", "b", "c"}), T({"b", "a", "c"}));
  EXPECT_EQ(lcs_length(T({"a", "b", "c"}), T({"b", "a", "c"})), 2u);
  EXPECT_NEAR(l.f, 2.0 / 3, 1e-12);
  EXPECT_DOUBLE_EQ(rouge_l(T({"x", "y"}), T({"x", "y"})).f, 1.0);
  EXPECT_DOUBLE_EQ(rouge_l({}, T({"x"})).f, 0.0);
}

TEST(Rouge, RatioBetaWeighting) {
  // L = 2, P = 1, R = 0.5, beta = 2: F = 5 * 0.5 / (0.5 + 4)
  const auto l = rouge_l(T({"a", "b"}), T({"a", "b", "c", "d"}), RougeLOptions{true});
  EXPECT_NEAR(l.f, 2.5 / 4.5, 1e-12);
  EXPECT_NEAR(rouge_l(T({"a", "b"}), T({"a", "b", "c", "d"})).f, 2.0 / 3, 1e-12);
}

TEST(Rouge, MatchesBruteForceReference) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    const auto c = random_tokens(rng, 10, 4);
    const auto r = random_tokens(rng, 10, 4);
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto got = rouge_n(c, r, static_cast<int>(n));
      const auto want = brute_rouge_n(c, r, n);
      EXPECT_NEAR(got.precision, want.precision, 1e-9);
      EXPECT_NEAR(got.recall, want.recall, 1e-9);
      EXPECT_NEAR(got.f, want.f, 1e-9);
    }
    const auto lcs = brute_lcs(c, r);
    EXPECT_EQ(lcs_length(c, r), lcs);
    const auto got = rouge_l(c, r);
    if (!c.empty() && !r.empty()) {
      EXPECT_NEAR(got.f, f1(double(lcs) / double(c.size()), double(lcs) / double(r.size())), 1e-9);
    } else {
      EXPECT_EQ(got.f, 0.0);
    }
  }
}

// ---- BLEU ------------------------------------------------------------------

TEST(Bleu, HandComputedValues) {
  const auto s = T({"the", "cat", "sat", "on", "the", "mat"});
  EXPECT_NEAR(bleu4(s, s), 1.0, 1e-12);
  EXPECT_NEAR(bleu4(T({"a", "a", "a", "a"}), T({"a", "a", "a", "a", "a", "a", "a", "a"})), std::exp(-1.0), 1e-12);
  EXPECT_DOUBLE_EQ(bleu4(T({"x", "y", "z", "w"}), s), 0.0);
  EXPECT_DOUBLE_EQ(bleu4({}, s), 0.0);
  // p1 = 3/4, p2 = 1/3, p3 and p4 smoothed to 1/(2*2) and 1/(2*1)
  const double want = std::exp((std::log(0.75) + std::log(1.0 / 3) + std::log(0.25) + std::log(0.5)) / 4);
  EXPECT_NEAR(bleu4(T({"the", "cat", "ran", "on"}), T({"the", "cat", "sat", "on"})), want, 1e-12);
}

TEST(Bleu, MatchesBruteForceReference) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 50; ++i) {
    const auto c = random_tokens(rng, 10, 3);
    const auto r = random_tokens(rng, 10, 3);
    const double got = bleu4(c, r);
    EXPECT_NEAR(got, brute_bleu(c, r), 1e-9);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0);
  }
}

// ---- F_BERT ----------------------------------------------------------------

TEST(BertScore, HandComputedGreedyMatch) {
  const std::vector<Vector> cand{{1, 0}};
  const std::vector<Vector> ref{{0.5, std::sqrt(0.75)}, {0.9, std::sqrt(0.19)}};
  const auto s = bert_score_f(cand, ref);
  EXPECT_NEAR(s.precision, 0.9, 1e-12);
  EXPECT_NEAR(s.recall, 0.7, 1e-12);
  EXPECT_NEAR(s.f, 0.7875, 1e-12);
}

TEST(BertScore, IdentityOrthogonalityAndErrors) {
  const std::vector<Vector> v{{1, 2, 3}, {0, 1, 0}};
  const auto same = bert_score_f(v, v);
  EXPECT_NEAR(same.f, 1.0, 1e-12);
  EXPECT_NEAR(bert_score_f({{1, 0, 0}}, {{0, 1, 0}, {0, 0, 1}}).f, 0.0, 1e-12);
  EXPECT_THROW(bert_score_f({{1, 0}}, {{1, 0, 0}}), DimensionMismatchError);
  EXPECT_THROW(bert_score_f({{0, 0}}, {{1, 0}}), ZeroVectorError);
  EXPECT_EQ(bert_score_f({}, v).f, 0.0);
}

TEST(BertScore, PermutationInvariant) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int round = 0; round < 30; ++round) {
    std::vector<Vector> c(1 + rng() % 6, Vector(5));
    std::vector<Vector> r(1 + rng() % 6, Vector(5));
    for (auto* side : {&c, &r}) {
      for (auto& x : *side) {
        for (auto& e : x) e = g(rng);
      }
    }
    const auto base = bert_score_f(c, r);
    std::shuffle(c.begin(), c.end(), rng);
    std::shuffle(r.begin(), r.end(), rng);
    const auto perm = bert_score_f(c, r);
    EXPECT_NEAR(base.precision, perm.precision, 1e-12);
    EXPECT_NEAR(base.recall, perm.recall, 1e-12);
    EXPECT_NEAR(base.f, perm.f, 1e-12);
  }
}

TEST(HashEmbedder, DeterministicAndNonZero) {
  HashEmbedder e(16, 3);
  const auto a = e.embed(T({"x", "y", "x"}));
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0], a[2]);
  EXPECT_NE(a[0], a[1]);
  EXPECT_EQ(HashEmbedder(16, 3).embed(T({"x"}))[0], a[0]);
  for (const auto& v : a) {
    EXPECT_EQ(v.size(), 16u);
    EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](double d) { return d != 0; }));
  }
}

// ---- reports ---------------------------------------------------------------

TEST(Evaluate, IdenticalPairsScoreOne) {
  HashEmbedder e;
  const auto rep = evaluate_model_outputs({{"我 很 好 today is fine", "我 很 好 today is fine"},
                                           {"one two three four", "one two three four"}},
                                          TokenizerMode::cjk_char, &e);
  EXPECT_NEAR(rep.rouge1, 1, 1e-12);
  EXPECT_NEAR(rep.rouge2, 1, 1e-12);
  EXPECT_NEAR(rep.rougeL, 1, 1e-12);
  EXPECT_NEAR(rep.bleu4, 1, 1e-12);
  ASSERT_TRUE(rep.f_bert);
  EXPECT_NEAR(*rep.f_bert, 1, 1e-12);
  EXPECT_EQ(rep.pairs, 2u);
}

TEST(Evaluate, MacroAverageAndFormats) {
  const auto one = evaluate_model_outputs({{"a b c", "a c d"}}, TokenizerMode::whitespace);
  EXPECT_NEAR(one.rouge1, 2.0 / 3, 1e-12);
  EXPECT_FALSE(one.f_bert);
  const auto two = evaluate_model_outputs({{"a b c", "a c d"}, {"x", "y"}}, TokenizerMode::whitespace);
  EXPECT_NEAR(two.rouge1, 1.0 / 3, 1e-12);
  // BLEU: (2/3 * 1/4 * 1/2 * 1/2)^(1/4) with smoothed higher orders
  EXPECT_NEAR(one.bleu4, std::pow(1.0 / 24, 0.25), 1e-12);
  EXPECT_EQ(one.to_csv(), "rouge1,rouge2,rougeL,bleu4,f_bert\n66.67,0.00,66.67,45.18,\n");
  EXPECT_TRUE(one.to_json()["f_bert"].is_null());
  EXPECT_THROW(evaluate_model_outputs({}, TokenizerMode::whitespace), InvariantError);
}

TEST(Evaluate, RangesHoldOnRandomText) {
  std::mt19937_64 rng(31);
  HashEmbedder e(32);
  for (int i = 0; i < 30; ++i) {
    auto join = [](const Tokens& t) {
      std::string s;
      for (const auto& x : t) s += x + " ";
      return s;
    };
    const auto rep = evaluate_model_outputs({{join(random_tokens(rng, 12, 5)), join(random_tokens(rng, 12, 5))}},
                                            TokenizerMode::whitespace, &e);
    for (double v : {rep.rouge1, rep.rouge2, rep.rougeL, rep.bleu4, *rep.f_bert}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-12);
    }
  }
}

TEST(Evaluate, PairsFromJson) {
  const auto p = pairs_from_json(nlohmann::json::parse(R"([{"generated": "a", "reference": "b"}])"));
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].reference, "b");
  try {
    pairs_from_json(nlohmann::json::parse(R"([{"generated": "a", "reference": "b"}, {"generated": 1}])"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), "record 1");
  }
}
