#include <gtest/gtest.h>

#include "p2f/dataset.hpp"
#include "p2f/obfuscation.hpp"

using namespace p2f;

TEST(Directive, ParseNames) {
  EXPECT_EQ(parse_directive_scheme("p2f-v2"), DirectiveScheme::P2F_V2);
  EXPECT_EQ(parse_directive_scheme("DI_V3"), DirectiveScheme::DI_V3);
  EXPECT_EQ(to_string(DirectiveScheme::DI_V4), "DI_V4");
  EXPECT_THROW(parse_directive_scheme("P2F_V9"), InvalidArgument);
  EXPECT_TRUE(is_p2f(DirectiveScheme::P2F_V3));
  EXPECT_FALSE(is_p2f(DirectiveScheme::DI_V1));
}

TEST(Directive, ThirdWordingIsUnavailable) {
  EXPECT_THROW(build_directive(DirectiveScheme::P2F_V3), DirectiveUnavailable);
  for (auto s : {DirectiveScheme::P2F_V1, DirectiveScheme::P2F_V2, DirectiveScheme::DI_V1,
                 DirectiveScheme::DI_V2, DirectiveScheme::DI_V3, DirectiveScheme::DI_V4}) {
    EXPECT_FALSE(build_directive(s).rendered.empty());
  }
}

TEST(Obfuscation, P2fListsCombinedQuestionsFirst) {
  auto mock = std::make_shared<MockBackend>();
  mock->otherwise("Understood.");
  ObfuscationSession s(legal_case_fixture(), Session(mock), DirectiveScheme::P2F_V1);
  s.synthetics = {"Nimbus"};
  s.combined = {"Q one?", "Q two?"};
  const auto msg = obfuscation_message(s);
  EXPECT_EQ(msg.rfind("Ground Truth Question 1: Q one?\nGround Truth Question 2: Q two?\n", 0), 0u);
  EXPECT_NE(msg.find(build_directive(DirectiveScheme::P2F_V1).rendered), std::string::npos);
  s.combined_in_transcript = true;
  EXPECT_EQ(obfuscation_message(s), build_directive(DirectiveScheme::P2F_V1).rendered);

  apply_obfuscation(s);
  EXPECT_EQ(s.acknowledgment, "Understood.");
  EXPECT_EQ(s.session.query_count(), 1u);
}

TEST(Obfuscation, ContentChecks) {
  auto mock = std::make_shared<MockBackend>();
  mock->otherwise("ok");
  ObfuscationSession p2f(legal_case_fixture(), Session(mock), DirectiveScheme::P2F_V2);
  EXPECT_THROW(apply_obfuscation(p2f), InvalidArgument);

  ObfuscationSession di(legal_case_fixture(), Session(mock), DirectiveScheme::DI_V2);
  EXPECT_NO_THROW(apply_obfuscation(di));
  EXPECT_EQ(di.session.transcript()[0].content, build_directive(DirectiveScheme::DI_V2).rendered);
  di.combined = {"x?"};
  EXPECT_THROW(apply_obfuscation(di), InvalidArgument);
}
