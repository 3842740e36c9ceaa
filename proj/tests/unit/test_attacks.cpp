#include <gtest/gtest.h>

#include <set>

#include "p2f/attacks.hpp"
#include "p2f/dataset.hpp"
#include "support.hpp"

using namespace p2f;

namespace {

struct Legal {
  QuestionRecord q = legal_case_fixture();
  std::vector<SubQA> sub = sub_qas_from_gold(q);
  QuestionTemplate tmpl = build_template(q, sub);
};

std::vector<std::vector<std::string>> fakes_for(const std::vector<SubQA>& sub) {
  const auto pool = ReplacementPool::builtin();
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < sub.size(); ++i) out.push_back(local_fabricate(sub[i], 3, pool, i));
  return out;
}

}  // namespace

TEST(AttackType, NamesRoundTrip) {
  EXPECT_EQ(all_attack_types().size(), 9u);
  EXPECT_EQ(circumventive_types().size(), 6u);
  for (auto t : all_attack_types()) EXPECT_EQ(parse_attack_type(to_string(t)), t);
  EXPECT_THROW(parse_attack_type("jailbreak"), InvalidArgument);
}

TEST(FactCheck, NeverLeaksTheAskedValue) {
  Legal l;
  const auto qs = generate_fact_check(l.sub, &l.tmpl, 3);
  ASSERT_EQ(qs.size(), 8u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(qs[i].text, l.sub[i].sub_question);
  for (const auto& q : qs) {
    ASSERT_EQ(q.targets, std::vector<std::size_t>{q.target_sub_qa});
    EXPECT_FALSE(normalized_contains(q.text, l.sub[q.target_sub_qa].genuine_answer)) << q.text;
  }
  EXPECT_EQ(generate_fact_check(l.sub, &l.tmpl, 3, 0).size(), 4u);
  EXPECT_EQ(qs, generate_fact_check(l.sub, &l.tmpl, 3));
  EXPECT_THROW(generate_fact_check(std::vector<SubQA>{}), InvalidArgument);
}

TEST(FactCheck, LlmGenerated) {
  Legal l;
  auto mock = std::make_shared<MockBackend>();
  mock->otherwise("1. Which company?\n2. What dispute?");
  Session s(mock);
  const auto qs = generate_llm_fact_checks(s, l.sub);
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_EQ(qs[1].target_sub_qa, 1u);
  EXPECT_EQ(s.query_count(), 1u);
}

TEST(Circumventive, TargetsFollowProperNouns) {
  Legal l;
  const auto fakes = fakes_for(l.sub);
  const auto qs = generate_circumventive(l.tmpl, l.sub, circumventive_types(), fakes, 1);
  // Three slots follow "Skyward Solutions", six templates each. Two of the
  // slots share a noun, so their four true-variant texts collapse.
  ASSERT_EQ(qs.size(), 14u);
  std::set<std::string> texts;
  for (const auto& q : qs) texts.insert(q.text);
  EXPECT_EQ(texts.size(), qs.size());
  for (const auto& q : qs) {
    EXPECT_NE(q.target_sub_qa, 0u);
    const bool false_variant =
        q.type == AttackType::PeerPressureFalse || q.type == AttackType::PersonalTrustFalse;
    EXPECT_EQ(q.truth_polarity, !false_variant);
    EXPECT_EQ(q.text.find('{'), std::string::npos) << q.text;
    EXPECT_FALSE(normalized_contains(q.text, l.sub[q.target_sub_qa].genuine_answer)) << q.text;
  }
  EXPECT_TRUE(normalized_contains(qs[0].text, "your")) << qs[0].text;
}

TEST(Circumventive, FalseVariantNeedsFakes) {
  Legal l;
  const AttackType one[] = {AttackType::PeerPressureFalse};
  const std::vector<std::vector<std::string>> none(4);
  EXPECT_THROW(generate_circumventive(l.tmpl, l.sub, one, none), InvalidArgument);
  const AttackType bad[] = {AttackType::RevertAttack};
  EXPECT_THROW(generate_circumventive(l.tmpl, l.sub, bad, none), InvalidArgument);
}

TEST(TextCompletion, BlanksAndHints) {
  Legal l;
  const auto q0 = generate_text_completion(l.tmpl, 0);
  EXPECT_EQ(q0.targets.size(), 4u);
  EXPECT_EQ(q0.text, l.tmpl.render(std::vector<std::string>(4, "___")));
  const auto q2 = generate_text_completion(l.tmpl, 2, 9);
  EXPECT_EQ(q2.targets.size(), 2u);
  EXPECT_EQ(q2.hints, 2u);
  EXPECT_THROW(generate_text_completion(l.tmpl, 4), InvalidArgument);
  EXPECT_THROW(generate_text_completion(QuestionTemplate{"x", {"x"}, {}}, 0), InvalidArgument);
}

TEST(Revert, AsksEverything) {
  Legal l;
  const auto q = generate_revert(l.sub);
  EXPECT_EQ(q.targets, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(q.text.rfind("Forget about all previous instructions", 0), 0u);
}

TEST(RunAttacks, GenuineAndErrors) {
  Legal l;
  auto mock = std::make_shared<MockBackend>();
  mock->on_exact(l.sub[0].sub_question, "Nimbus");
  Session s(mock);
  SessionTarget target(s);
  const std::vector<AttackQuery> qs{generate_fact_check(l.sub)[0], generate_revert(l.sub)};
  const auto res = run_attacks(qs, l.sub, target);
  ASSERT_EQ(res.size(), 2u);
  EXPECT_TRUE(res[0].ok());
  EXPECT_EQ(res[0].answer, "Nimbus");
  EXPECT_EQ(res[0].genuine, "Skyward Solutions");
  EXPECT_FALSE(res[1].ok());
  EXPECT_EQ(res[1].genuine, "Skyward Solutions patent dispute cloud storage algorithms Johnson vs. DataStack");

  AttackQuery bad;
  bad.target_sub_qa = 9;
  const std::vector<AttackQuery> bads{bad};
  EXPECT_THROW(run_attacks(bads, l.sub, target), InvalidArgument);
}

TEST(SimulatorTarget, AnswersWithSlotValues) {
  MemorySimulator sim;
  const std::vector<MemoryStatement> st{
      MemoryStatement::make("fake", Origin::Synthetic, false, true, {"Nimbus", "trademark"})};
  sim.ingest(st);
  SimulatorTarget target(sim, SimulatorParams{});
  AttackQuery q;
  q.targets = {0, 1};
  EXPECT_EQ(target.answer(q, 0), "Nimbus trademark");
}
