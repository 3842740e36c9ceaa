#include <gtest/gtest.h>

#include <algorithm>

#include "p2f/assets.hpp"
#include "p2f/core.hpp"

using namespace p2f;

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(assets::sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(assets::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// Frozen digests of the prompt catalog. A change here changes every run
// manifest, so it has to be deliberate.
TEST(Catalog, PromptDigestsAreFrozen) {
  const std::pair<const char*, const char*> frozen[] = {
      {"prompts/combination_v1.txt", "64ce0d5976d788aec89066b6c63ca5b20e43e948c02b121eb0a2c2d8258fe321"},
      {"prompts/combination_v2.txt", "fb9bb3b3f16e40482407b1eab28d1d699f638fd3084edf516bc35cba1d98b61a"},
      {"prompts/decomposition_v1.txt", "1eeac374b1ea8dc25cb6f48619024a3acfb5e2d7168835cfa3e2406eaa19449a"},
      {"prompts/decomposition_v2.txt", "cbf41711596dab12ceac0d381e1aa40050f2f4ea2a80a8ef42fa4bd8c0978cd2"},
      {"prompts/direct_instruction_v1.txt", "06046ec14764697a3e93cd09b4ba8dfba479d2ff100273367c1753c93c8df11d"},
      {"prompts/direct_instruction_v2.txt", "050e5015858d6512f426c84fa5b7341813f2f41cf28f9ab6c7ead1c352b38355"},
      {"prompts/direct_instruction_v3.txt", "0fed06a6e04bdeabf137a110ba12472a3bfe85bb2d3a8ac7bb29c590999e6cd1"},
      {"prompts/direct_instruction_v4.txt", "493d6ac1e0cc9bd36e2c145fb0e643a5c5251f88d8ed7393a0de031580a03eea"},
      {"prompts/fabrication_v1.txt", "64ded3df75c63c3e0e5463e3d3db2f4578a075decbf0af35270e287dff8882f5"},
      {"prompts/fabrication_v2.txt", "b2dc717ced063468c8a89401b7a00fd9ea32c67f79442b51a45106cf47599259"},
      {"prompts/obfuscation_p2f_v1.txt", "ad170804a997731cc02c4b388f3edf5bb459559c2f0b7d519aebac40134ba253"},
      {"prompts/obfuscation_p2f_v2.txt", "47455739068eaca88453c6bd54b7b8e26cbcb5f0f07d9e4374de4e80eb270552"},
      {"attacks/hypothetical_recall.txt", "633bc1414c2f067f4a3d62a099eb86b300c3679896da39f05d192e850ae72402"},
      {"attacks/partial_recall.txt", "1fe461c3a0eaad03470bf5dc7f275b6bf23ec07f854047db12d39b494ec0fb5f"},
      {"attacks/peer_pressure_false.txt", "00e51bf338f4fbdeaf66e154b1a7602aee9538f87af73a0dda88d6a5f19ccfc4"},
      {"attacks/peer_pressure_true.txt", "dfd72635bf5b190ffd1f2733a7534c586051e2e53fb16e5a6410602bf7562afc"},
      {"attacks/personal_trust_false.txt", "a1b8ecec75badf72bd6f6010b76ff6db14a9f8355eb7f1c69337f803e0c57da3"},
      {"attacks/personal_trust_true.txt", "c9a7040003d4f8acdb7e0016f9f6706cc672a802e80d80bd544ddfdafbd1d89d"},
      {"attacks/revert.txt", "9f5cdbc30c85523984f3072ad6fb9fb32c17bf629256278de03f97adaa54b932"},
  };
  for (const auto& [path, digest] : frozen) {
    EXPECT_EQ(assets::sha256_hex(assets::raw(path)), digest) << path;
  }
}

TEST(Catalog, NoThirdObfuscationWording) {
  for (const auto& e : assets::embedded()) {
    EXPECT_EQ(e.path.find("obfuscation_p2f_v3"), std::string_view::npos);
  }
}

TEST(Catalog, EmbeddedIsSortedAndDigestStable) {
  const auto all = assets::embedded();
  ASSERT_FALSE(all.empty());
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end(),
                             [](const auto& a, const auto& b) { return a.path < b.path; }));
  EXPECT_EQ(assets::catalog_digest(), assets::catalog_digest());
  EXPECT_EQ(assets::catalog_digest().size(), 64u);
}

TEST(Assets, TextAndRender) {
  EXPECT_THROW(assets::raw("nope.txt"), Error);
  const auto t = assets::text("prompts/decomposition_v2.txt");
  EXPECT_FALSE(t.empty());
  EXPECT_NE(t.back(), '\n');
  EXPECT_EQ(assets::render("{m} of {n} {unknown}", {{"m", "5"}, {"n", "7"}}), "5 of 7 {unknown}");
  EXPECT_EQ(assets::render("open { brace", {{"m", "5"}}), "open { brace");
}
