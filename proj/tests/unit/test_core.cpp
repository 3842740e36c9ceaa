#include <gtest/gtest.h>

#include <set>

#include "p2f/core.hpp"
#include "p2f/dataset.hpp"
#include "p2f/random.hpp"

using namespace p2f;

TEST(Tokenize, SplitsOnPunctuationAndKeepsOffsets) {
  const std::string text = "We sued Skyward, didn't we?";
  const auto toks = split_tokens(text);
  ASSERT_EQ(toks.size(), 5u);
  EXPECT_EQ(toks[3].text, "didn't");
  for (const auto& t : toks) EXPECT_EQ(text.substr(t.start, t.end - t.start), t.text);
  EXPECT_TRUE(toks[0].sentence_initial);
  EXPECT_FALSE(toks[2].sentence_initial);
}

TEST(Tokenize, SentenceInitialAfterFullStop) {
  const auto toks = split_tokens("It rained. Then it stopped");
  ASSERT_EQ(toks.size(), 5u);
  EXPECT_TRUE(toks[2].sentence_initial);
}

TEST(Tokenize, NonAsciiBytesAreWordCharacters) {
  const auto toks = split_tokens("caf\xc3\xa9 ol\xc3\xa9");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].text, "caf\xc3\xa9");
}

TEST(PosTag, CoarseClasses) {
  EXPECT_EQ(pos_tag("2021"), WordClass::Num);
  EXPECT_EQ(pos_tag("the"), WordClass::Other);
  EXPECT_EQ(pos_tag("Skyward"), WordClass::Propn);
  EXPECT_EQ(pos_tag("Skyward", {true}), pos_tag("Skyward", {true}));
  EXPECT_EQ(pos_tag("storage"), WordClass::Noun);
  EXPECT_EQ(pos_tag("quickly"), WordClass::Adv);
}

TEST(Tokenize, ProperNounsKeepCase) {
  const auto seq = tokenize("The case against Skyward Solutions");
  ASSERT_EQ(seq.size(), 5u);
  EXPECT_EQ(seq.tokens[0], "the");
  EXPECT_EQ(seq.tokens[3], "Skyward");
  EXPECT_EQ(seq.classes[3], WordClass::Propn);
  EXPECT_EQ(seq.tokens.size(), seq.classes.size());
}

TEST(Text, NormalizedHelpers) {
  EXPECT_EQ(normalized_tokens("Hello, World!"), (std::vector<std::string>{"hello", "world"}));
  EXPECT_TRUE(normalized_equal("Skyward Solutions.", "skyward solutions"));
  EXPECT_FALSE(normalized_equal("Skyward", "Skyward Solutions"));
  EXPECT_TRUE(normalized_contains("a case against Skyward Solutions.", "skyward solutions"));
  EXPECT_FALSE(normalized_contains("a case against Skyward", "Solutions"));
  EXPECT_FALSE(normalized_contains("anything", ""));
  EXPECT_EQ(word_count("  one two\tthree \n"), 3u);
  EXPECT_EQ(trim("  x y  "), "x y");
  const std::vector<std::string> parts{"a", "b", "c"};
  EXPECT_EQ(join(parts, ", "), "a, b, c");
}

TEST(Category, RoundTripsEveryName) {
  for (auto c : {Category::Business, Category::Legal, Category::Health, Category::Career,
                 Category::Education, Category::Social, Category::Personal}) {
    EXPECT_EQ(parse_category(to_string(c)), c);
  }
  EXPECT_FALSE(parse_category("Finance").has_value());
  EXPECT_EQ(category_list(), "Business, Legal, Health, Career, Education, Social, Personal");
}

TEST(Validate, AcceptsLegalFixture) { EXPECT_NO_THROW(validate(legal_case_fixture())); }

TEST(Validate, RejectsBadRecords) {
  auto base = legal_case_fixture();

  auto r = base;
  r.id.clear();
  EXPECT_THROW(validate(r), ValidationError);

  r = base;
  r.gold_elements[0].span = {5, 5};
  EXPECT_THROW(validate(r), ValidationError);

  r = base;
  r.gold_elements[0].span.end = r.text.size() + 1;
  EXPECT_THROW(validate(r), ValidationError);

  r = base;
  r.gold_elements[1].span = r.gold_elements[0].span;
  EXPECT_THROW(validate(r), ValidationError);

  r = base;
  r.text.clear();
  for (int i = 0; i < 51; ++i) r.text += "word ";
  r.gold_elements.clear();
  try {
    validate(r);
    FAIL() << "expected a word-limit error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("51 words"), std::string::npos);
  }
}

TEST(Random, DeriveSeedSeparatesStreams) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_EQ(derive_seed(7, "sweep"), derive_seed(7, "sweep"));
}

TEST(Random, UniformAndBelowStayInRange) {
  Rng rng(42);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(7), 7u);
  }
  EXPECT_THROW(rng.below(0), InvalidArgument);
}

TEST(Random, PermutationIsDeterministicAndComplete) {
  const auto p = seeded_permutation(50, 9);
  EXPECT_EQ(p, seeded_permutation(50, 9));
  EXPECT_NE(p, seeded_permutation(50, 10));
  EXPECT_EQ(std::set<std::size_t>(p.begin(), p.end()).size(), 50u);
}
