#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <set>

#include "p2f/dataset.hpp"
#include "support.hpp"

using namespace p2f;

namespace {

std::string line_of(const QuestionRecord& r) { return serialize_record(r) + "\n"; }

}  // namespace

TEST(Corpus, RoundTripThroughText) {
  const auto corpus = scaffold_generate(builtin_scaffold_templates(), 4, 1);
  const auto text = serialize_corpus(corpus);
  EXPECT_EQ(parse_corpus(text), corpus);
  EXPECT_EQ(serialize_corpus(parse_corpus(text)), text);
}

TEST(Corpus, RoundTripThroughFile) {
  std::vector<QuestionRecord> corpus{legal_case_fixture()};
  corpus.push_back(support::people_question(3));
  corpus.back().gold_sub_questions.clear();
  const auto path = std::filesystem::temp_directory_path() / "p2f_corpus_test.jsonl";
  save_corpus(corpus, path);
  EXPECT_EQ(load_corpus(path), corpus);
  std::filesystem::remove(path);
  EXPECT_THROW(load_corpus(path), ValidationError);
}

TEST(Corpus, RepositoryDemoLoads) {
  const auto corpus = load_corpus(support::repo_fixture("demo.jsonl"));
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_EQ(corpus[0], legal_case_fixture());
}

TEST(Corpus, ErrorsCarryLineNumbers) {
  const auto good = line_of(legal_case_fixture());
  try {
    parse_corpus(good + "\n" + good, "dup.jsonl");
    FAIL();
  } catch (const CorpusError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(std::string(e.what()).rfind("dup.jsonl:3:", 0), 0u) << e.what();
  }
  try {
    parse_corpus(R"({"id":"x","category":"Finance","text":"hi","gold_elements":[]})");
    FAIL();
  } catch (const CorpusError& e) {
    EXPECT_NE(std::string(e.what()).find(category_list()), std::string::npos);
  }
  EXPECT_THROW(parse_corpus("{not json"), CorpusError);
  EXPECT_THROW(parse_corpus(R"({"id":"x","category":"Legal","text":"hi",)"
                            R"("gold_elements":[{"start":0,"end":9,"label":"ORG"}]})"),
               CorpusError);
  EXPECT_TRUE(parse_corpus("\n\n").empty());
}

TEST(Scaffold, SevenCategoriesOfTwenty) {
  const auto templates = builtin_scaffold_templates();
  const auto corpus = scaffold_generate(templates, 20, 0);
  ASSERT_EQ(corpus.size(), 140u);
  std::map<Category, std::size_t> per;
  std::set<std::string> ids, texts;
  for (const auto& r : corpus) {
    ++per[r.category];
    ids.insert(r.id);
    texts.insert(r.text);
    EXPECT_NO_THROW(validate(r));
    EXPECT_LE(word_count(r.text), kMaxQuestionWords);
    EXPECT_EQ(r.gold_sub_questions.size(), r.gold_elements.size());
  }
  EXPECT_EQ(per.size(), 7u);
  for (const auto& [c, n] : per) EXPECT_EQ(n, 20u) << to_string(c);
  EXPECT_EQ(ids.size(), 140u);
  EXPECT_EQ(texts.size(), 140u);
  EXPECT_EQ(corpus.front().id, "business-001");
}

TEST(Scaffold, Deterministic) {
  const auto t = builtin_scaffold_templates();
  EXPECT_EQ(scaffold_generate(t, 6, 42), scaffold_generate(t, 6, 42));
  EXPECT_NE(scaffold_generate(t, 6, 42), scaffold_generate(t, 6, 43));
}

TEST(Scaffold, RenderRecordsSpans) {
  const auto templates = parse_scaffold_templates(R"({"templates": [{
      "category": "Legal", "name": "t", "text": "Can {who} sue {whom} in {where}?",
      "slots": {"who": {"label": "PERSON", "question": "Who sues?", "values": ["Ann"]},
                "whom": {"label": "ORG", "question": "Who is sued?", "values": ["Acme"]},
                "where": {"label": "PLACE", "question": "Where?", "values": ["Ohio"]}}}]})");
  ASSERT_EQ(templates.size(), 1u);
  EXPECT_EQ(templates[0].slots[1].name, "whom");
  const std::vector<std::string> values{"Ann", "Acme", "Ohio"};
  const auto r = render_scaffold(templates[0], values, "x");
  EXPECT_EQ(r.text, "Can Ann sue Acme in Ohio?");
  EXPECT_EQ(r.gold_texts(), values);
  EXPECT_EQ(r.gold_sub_questions[2], "Where?");
  EXPECT_THROW(render_scaffold(templates[0], std::vector<std::string>{"Ann"}, "x"), Error);

  auto longer = templates[0];
  longer.text.clear();
  for (int i = 0; i < 50; ++i) longer.text += "word ";
  longer.text += "{who} {whom} {where}";
  try {
    render_scaffold(longer, values, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'t'"), std::string::npos) << e.what();
  }
}

TEST(Dataset, SubQasFromGold) {
  auto q = legal_case_fixture();
  auto sub = sub_qas_from_gold(q);
  ASSERT_EQ(sub.size(), 4u);
  EXPECT_EQ(sub[2].genuine_answer, "cloud storage algorithms");
  EXPECT_EQ(sub[2].label, "TECH");
  q.gold_sub_questions.clear();
  sub = sub_qas_from_gold(q);
  EXPECT_EQ(sub[2].sub_question, "What is the technology mentioned?");
}
