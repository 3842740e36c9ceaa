#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "p2f/metrics.hpp"

using namespace p2f;

namespace {

TokenSequence seq(std::vector<std::string> tokens, std::vector<WordClass> classes = {}) {
  if (classes.empty()) classes.assign(tokens.size(), WordClass::Noun);
  return {std::move(tokens), std::move(classes)};
}

// Independent scorer: integer counts, one division at the end.
double brute_combined(const TokenSequence& g, const TokenSequence& c, double alpha, double beta) {
  const long lg = static_cast<long>(g.size());
  const long lc = static_cast<long>(c.size());
  long differ = 0, class_differ = 0;
  for (long i = 0; i < std::min(lg, lc); ++i) {
    std::string a = g.tokens[i], b = c.tokens[i];
    for (auto& ch : a) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    for (auto& ch : b) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    differ += a != b;
    class_differ += g.classes[i] != c.classes[i];
  }
  const double gap = static_cast<double>(std::labs(lg - lc)) / static_cast<double>(std::max(lg, lc));
  return static_cast<double>(differ) / lg + 1.0 -
         (alpha * gap + beta * static_cast<double>(class_differ) / lg);
}

}  // namespace

TEST(Similarity, JaccardOracle) {
  const std::vector<std::string> a{"a", "b", "c"}, b{"b", "c", "d"};
  EXPECT_NEAR(similarity(a, b, SimilarityKind::Jaccard), 0.5, 1e-9);
  EXPECT_NEAR(similarity("a b c", "b c d", SimilarityKind::Jaccard), 0.5, 1e-9);
}

TEST(Similarity, CosineOracle) {
  // (2,1).(1,2) / (sqrt 5 * sqrt 5)
  EXPECT_NEAR(similarity("a a b", "a b b", SimilarityKind::Cosine), 0.8, 1e-9);
}

TEST(Similarity, EdgeCases) {
  const std::vector<std::string> none;
  const std::vector<std::string> x{"x"};
  EXPECT_EQ(similarity(none, none, SimilarityKind::Jaccard), 1.0);
  EXPECT_EQ(similarity(none, x, SimilarityKind::Cosine), 0.0);
  EXPECT_EQ(similarity("Same words here", "same, words here!", SimilarityKind::Cosine), 1.0);
  EXPECT_EQ(similarity("alpha", "beta", SimilarityKind::Jaccard), 0.0);
}

TEST(Similarity, BoundedAndSymmetric) {
  std::mt19937 gen(3);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> a, b;
    for (int i = 0, n = gen() % 6; i < n; ++i) a.push_back(vocab[gen() % 5]);
    for (int i = 0, n = gen() % 6; i < n; ++i) b.push_back(vocab[gen() % 5]);
    for (auto kind : {SimilarityKind::Jaccard, SimilarityKind::Cosine}) {
      const double s = similarity(a, b, kind);
      ASSERT_GE(s, 0.0);
      ASSERT_LE(s, 1.0);
      ASSERT_DOUBLE_EQ(s, similarity(b, a, kind));
    }
  }
}

TEST(Forgetfulness, MeanOfDissimilarity) {
  const std::vector<std::string> g{"Skyward Solutions", "patent dispute"};
  const std::vector<std::string> a{"Nimbus Analytics", "patent dispute"};
  EXPECT_NEAR(forgetfulness(g, a, SimilarityKind::Jaccard), 0.5, 1e-12);
  const std::vector<std::string> shorter{"x"};
  EXPECT_THROW(forgetfulness(g, shorter, SimilarityKind::Jaccard), InvalidArgument);
}

TEST(DistinctionRatio, Oracle) {
  EXPECT_NEAR(semantic_distinction_ratio(seq({"cloud", "storage", "algorithms"}),
                                         seq({"cloud", "encryption", "methods"})),
              2.0 / 3.0, 1e-9);
}

TEST(DistinctionRatio, SharedPrefixAndCase) {
  EXPECT_EQ(semantic_distinction_ratio(seq({"A", "b"}), seq({"a"})), 0.0);
  EXPECT_EQ(semantic_distinction_ratio(seq({"a", "b"}), seq({"x", "y", "z"})), 1.0);
  EXPECT_THROW(semantic_distinction_ratio(seq({}), seq({"a"})), MetricError);
}

TEST(StructureConsistency, Oracle) {
  EXPECT_NEAR(structure_consistency(seq({"a", "b"}), seq({"c", "d", "e", "f"}), {0.5, 0.5}), 0.75,
              1e-9);
}

TEST(StructureConsistency, ClassMismatch) {
  const auto g = seq({"x", "y"}, {WordClass::Noun, WordClass::Verb});
  const auto c = seq({"x", "y"}, {WordClass::Noun, WordClass::Noun});
  EXPECT_NEAR(structure_consistency(g, c, {0.5, 0.5}), 0.75, 1e-12);
  EXPECT_THROW(structure_consistency(g, c, {0.7, 0.7}), InvalidArgument);
  EXPECT_THROW(structure_consistency(g, c, {-0.1, 0.5}), InvalidArgument);
}

TEST(Selection, LowestIndexWinsTies) {
  const auto g = seq({"a", "b"});
  const std::vector<TokenSequence> cands{seq({"x", "b"}), seq({"a", "y"}), seq({"x", "y"})};
  const auto sel = select_best_candidate(g, cands);
  EXPECT_EQ(sel.index, 2u);
  const std::vector<TokenSequence> tied{seq({"x", "b"}), seq({"a", "y"})};
  EXPECT_EQ(select_best_candidate(g, tied).index, 0u);
  EXPECT_THROW(select_best_candidate(g, std::vector<TokenSequence>{}), InvalidArgument);
}

TEST(Selection, MatchesBruteForceOnRandomSets) {
  std::mt19937_64 gen(2024);
  const std::vector<std::string> vocab{"cloud", "Cloud", "storage", "data", "patent", "case"};
  const WordClass classes[] = {WordClass::Noun, WordClass::Propn, WordClass::Verb, WordClass::Num};
  auto random_seq = [&](std::size_t min_len) {
    TokenSequence s;
    const std::size_t n = min_len + gen() % 5;
    for (std::size_t i = 0; i < n; ++i) {
      s.tokens.push_back(vocab[gen() % vocab.size()]);
      s.classes.push_back(classes[gen() % 4]);
    }
    return s;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto g = random_seq(1);
    std::vector<TokenSequence> cands;
    for (std::size_t j = 0, n = 1 + gen() % 6; j < n; ++j) cands.push_back(random_seq(0));
    const double alpha = static_cast<double>(gen() % 5) / 10.0;
    const double beta = static_cast<double>(gen() % 6) / 10.0;
    std::size_t best = 0;
    for (std::size_t j = 1; j < cands.size(); ++j) {
      if (brute_combined(g, cands[j], alpha, beta) > brute_combined(g, cands[best], alpha, beta) + 1e-12) {
        best = j;
      }
    }
    const auto sel = select_best_candidate(g, cands, {alpha, beta});
    ASSERT_EQ(sel.index, best) << "trial " << trial;
    for (std::size_t j = 0; j < cands.size(); ++j) {
      ASSERT_NEAR(sel.scores[j].combined, brute_combined(g, cands[j], alpha, beta), 1e-12);
    }
  }
}

TEST(Prf1, PerfectAndHalf) {
  const std::vector<std::string> gold{"Skyward Solutions", "patent dispute", "cloud storage algorithms",
                                      "Johnson vs. DataStack"};
  const auto p = prf1(gold, gold);
  EXPECT_EQ(p.precision, 1.0);
  EXPECT_EQ(p.recall, 1.0);
  EXPECT_EQ(p.f1, 1.0);

  const std::vector<std::string> half{"Skyward Solutions", "a patent dispute"};
  const auto h = prf1(half, gold);
  EXPECT_NEAR(h.precision, 1.0, 1e-12);
  EXPECT_NEAR(h.recall, 0.5, 1e-12);
  EXPECT_NEAR(h.f1, 2.0 / 3.0, 1e-12);
}

TEST(Prf1, OneToOneMatching) {
  const std::vector<std::string> gold{"Skyward Solutions"};
  const std::vector<std::string> dup{"Skyward Solutions", "Skyward"};
  const auto p = prf1(dup, gold);
  EXPECT_NEAR(p.precision, 0.5, 1e-12);
  EXPECT_EQ(p.recall, 1.0);
  EXPECT_NEAR(gold_coverage("Skyward", "Skyward Solutions"), 0.5, 1e-12);
  EXPECT_EQ(gold_coverage("anything", ""), 0.0);
}
