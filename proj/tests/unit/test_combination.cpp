#include <gtest/gtest.h>

#include "p2f/combination.hpp"
#include "p2f/dataset.hpp"
#include "support.hpp"

using namespace p2f;
using p2f::support::combination_case;

TEST(Template, LegalCaseLiteralsAndSlots) {
  const auto q = legal_case_fixture();
  const auto tmpl = build_template(q, sub_qas_from_gold(q));
  ASSERT_EQ(tmpl.slot_count(), 4u);
  EXPECT_EQ(tmpl.literals.size(), 5u);
  EXPECT_EQ(tmpl.slots[0].genuine, "Skyward Solutions");
  EXPECT_EQ(tmpl.render(tmpl.genuine_values()), q.text);
  EXPECT_EQ(tmpl.match(q.text), tmpl.genuine_values());
  EXPECT_FALSE(tmpl.match("something else entirely").has_value());
  EXPECT_THROW(tmpl.render(std::vector<std::string>{"one"}), InvalidArgument);
  EXPECT_EQ(tmpl.slot_of(2), 2u);
}

TEST(Template, AnchoringBySearch) {
  QuestionRecord q;
  q.id = "q";
  q.text = "We sued Skyward over patents.";
  std::vector<SubQA> sub(2);
  sub[0].genuine_answer = "Skyward.";
  sub[1].genuine_answer = "trademarks";
  EXPECT_THROW(build_template(q, sub, AnchorPolicy::Strict), AnchoringError);
  const auto tmpl = build_template(q, sub, AnchorPolicy::SkipUnanchored);
  ASSERT_EQ(tmpl.slot_count(), 1u);
  EXPECT_EQ(tmpl.slots[0].genuine, "Skyward");
  EXPECT_FALSE(tmpl.slot_of(1).has_value());

  sub[1].answer_span = Span{0, 2};
  EXPECT_THROW(build_template(q, sub, AnchorPolicy::SkipUnanchored), AnchoringError);
}

TEST(Template, LocateSkipsTakenSpans) {
  const std::string text = "Skyward sued Skyward";
  const auto first = locate_answer(text, "skyward");
  ASSERT_TRUE(first);
  const std::vector<Span> taken{*first};
  const auto second = locate_answer(text, "Skyward", taken);
  ASSERT_TRUE(second);
  EXPECT_EQ(second->start, 13u);
  EXPECT_FALSE(locate_answer(text, "").has_value());
}

TEST(Plan, DesignatedValuesAreFakeAndDisjoint) {
  const auto c = combination_case(legal_case_fixture(), 3, 1);
  ASSERT_EQ(c.plan.designated.size(), 4u);
  EXPECT_EQ(c.plan.output_count(), 12u);
  for (std::size_t s = 0; s < 4; ++s) {
    EXPECT_FALSE(normalized_contains(c.question.text, c.plan.designated[s]));
    for (std::size_t o = 0; o < 4; ++o) {
      if (o == s) continue;
      for (const auto& alt : c.plan.alternatives[s]) {
        EXPECT_FALSE(normalized_contains(alt, c.plan.designated[o]));
      }
    }
  }
  EXPECT_THROW(make_plan(c.tmpl, c.fabricated, 0), InvalidArgument);
}

TEST(Plan, KeepGenuineUsesOriginalValues) {
  const auto c = combination_case(legal_case_fixture(), 2, 1);
  const auto plan = make_plan(c.tmpl, c.fabricated, 2, PlanMode::KeepGenuine);
  EXPECT_EQ(plan.designated, c.tmpl.genuine_values());
  EXPECT_EQ(parse_plan_mode(to_string(PlanMode::KeepGenuine)), PlanMode::KeepGenuine);
}

// Round trip, exclusivity and cardinality over every scaffold question.
TEST(LocalCombine, PropertiesOverScaffoldCorpus) {
  const auto corpus = scaffold_generate(builtin_scaffold_templates(), 5, 3);
  ASSERT_FALSE(corpus.empty());
  for (const auto& q : corpus) {
    for (std::size_t repeats : {1u, 3u}) {
      const auto c = combination_case(q, repeats, 11);
      const auto out = local_combine(c.tmpl, c.plan, 17);
      ASSERT_EQ(out.size(), c.tmpl.slot_count() * repeats) << q.id;
      for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& o = out[i];
        ASSERT_EQ(*o.target_slot, c.plan.targets[i / repeats]);
        EXPECT_EQ(c.tmpl.match(o.text), o.values) << o.text;
        EXPECT_EQ(o.values[*o.target_slot], c.plan.designated[*o.target_slot]);
        for (std::size_t s = 0; s < o.values.size(); ++s) {
          if (s != *o.target_slot) EXPECT_NE(o.values[s], c.plan.designated[s]) << o.text;
        }
      }
      const auto report = validate_combination(out, c.plan, c.tmpl);
      EXPECT_EQ(report.compliant, out.size()) << q.id;
      EXPECT_EQ(out, local_combine(c.tmpl, c.plan, 17));
    }
  }
}

TEST(Validation, PlantedViolations) {
  const auto pc = p2f::support::planted_corpus();
  const auto report = validate_combination(pc.outputs, pc.base.plan, pc.base.tmpl);
  EXPECT_EQ(report.total, 100u);
  EXPECT_EQ(report.compliant, 53u);
  EXPECT_DOUBLE_EQ(report.compliance(), 0.53);
  std::size_t missing = 0, leaked = 0, structure = 0;
  for (const auto& v : report.violations) {
    missing += v.kind == ViolationKind::MissingTargetValue;
    leaked += v.kind == ViolationKind::LeakedTargetValue;
    structure += v.kind == ViolationKind::StructureMismatch;
  }
  EXPECT_EQ(missing, 16u);
  EXPECT_EQ(leaked, 16u);
  EXPECT_EQ(structure, 15u);
}

TEST(Validation, MissingTargetSlot) {
  const auto c = combination_case(legal_case_fixture(), 1, 2);
  std::vector<SyntheticQuestion> out{{c.question.text, std::nullopt, {}}};
  const auto report = validate_combination(out, c.plan, c.tmpl);
  EXPECT_EQ(report.compliant, 0u);
  EXPECT_EQ(report.violations[0].kind, ViolationKind::MissingTargetValue);
  EXPECT_EQ(ComplianceReport{}.compliance(), 1.0);
}

TEST(CombinationReply, Formats) {
  const auto parsed = parse_combination_reply(
      "For Sub-Question 1:\nGround Truth Question 1: Is it A?\nGround Truth Question 2: ......\n"
      "For Sub-Question 2:\n\"Is it B?\"\n3) Is it C?\nnot a question\nIs it D?");
  ASSERT_EQ(parsed.size(), 4u);
  EXPECT_EQ(parsed[0].text, "Is it A?");
  EXPECT_EQ(parsed[0].sub_question, 1u);
  EXPECT_EQ(parsed[1].text, "Is it B?");
  EXPECT_EQ(parsed[1].sub_question, 2u);
  EXPECT_EQ(parsed[2].text, "Is it C?");
  EXPECT_EQ(parsed[3].text, "Is it D?");
  EXPECT_THROW(parse_combination_reply("no questions here"), CombinationParseError);
}

TEST(CombinationPrompt, Versions) {
  EXPECT_EQ(build_combination_prompt(CombinationVersion::V1, 3).find("{repeats}"), std::string::npos);
  EXPECT_EQ(parse_combination_version("v2"), CombinationVersion::V2);
  EXPECT_THROW(parse_combination_version("V9"), InvalidArgument);
}

TEST(LlmCombine, MapsHeadersToSlots) {
  const auto c = combination_case(legal_case_fixture(), 1, 4);
  std::vector<std::string> values = c.tmpl.genuine_values();
  values[1] = c.plan.designated[1];
  const auto text = c.tmpl.render(values);
  auto mock = std::make_shared<MockBackend>();
  mock->otherwise("For Sub-Question 2:\nGround Truth Question 1: " + text);
  Session session(mock);
  const auto out = llm_combine(session, CombinationVersion::V2, c.tmpl, c.plan, c.sub_qas);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].target_slot, 1u);
  EXPECT_EQ(out[0].values, values);
  EXPECT_EQ(session.query_count(), 1u);
}
