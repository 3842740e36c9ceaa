#include <gtest/gtest.h>

#include "p2f/memory_sim.hpp"

using namespace p2f;

namespace {

MemorySimulator world(std::size_t r) {
  std::vector<MemoryStatement> s;
  s.push_back(MemoryStatement::make("the case is against Skyward", Origin::Genuine, true, false));
  for (std::size_t k = 0; k < r; ++k) {
    s.push_back(MemoryStatement::make("the case is against Fake" + std::to_string(k),
                                      Origin::Synthetic, false, true));
  }
  MemorySimulator sim;
  sim.ingest(s);
  return sim;
}

double genuine_rate(std::size_t r, double lambda, std::size_t trials, std::uint64_t seed) {
  const auto sim = world(r);
  SimulatorParams p;
  p.leak_rate = lambda;
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto* s = sim.recall("who is the case against", p, rng);
    hits += s != nullptr && s->origin == Origin::Genuine;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace

TEST(MemoryStatement, RejectsContradictoryFlags) {
  EXPECT_THROW(MemoryStatement::make("x", Origin::Genuine, true, true), InvalidArgument);
  EXPECT_THROW(MemoryStatement::make("x", Origin::Genuine, false, false, {}, 0.0), InvalidArgument);
}

TEST(MemorySimulator, IngestIsIdempotent) {
  auto sim = world(3);
  const std::vector<MemoryStatement> again(sim.statements().begin(), sim.statements().end());
  sim.ingest(again);
  EXPECT_EQ(sim.size(), 4u);
}

TEST(MemorySimulator, EmptyPoolRefuses) {
  MemorySimulator sim;
  SimulatorParams p;
  EXPECT_EQ(sim.answer_attack("anything", p), MemorySimulator::kRefusal);
  // Only a denied statement and no leak: nothing to recall.
  const auto only = world(0);
  EXPECT_EQ(only.answer_attack("who", p), MemorySimulator::kRefusal);
}

TEST(MemorySimulator, ValidatesParams) {
  SimulatorParams p;
  p.leak_rate = 1.5;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.leak_rate = 0.5;
  p.match_threshold = -0.1;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(MemorySimulator, NoLeakNeverRecallsGenuine) {
  EXPECT_EQ(genuine_rate(5, 0.0, 2000, 1), 0.0);
}

TEST(MemorySimulator, FullLeakWithoutSyntheticsAlwaysRecallsGenuine) {
  EXPECT_EQ(genuine_rate(0, 1.0, 500, 2), 1.0);
}

TEST(MemorySimulator, GenuineRecallFollowsClosedForm) {
  for (double lambda : {0.5, 1.0}) {
    for (std::size_t r : {1u, 3u, 7u}) {
      EXPECT_NEAR(genuine_rate(r, lambda, 20000, 11), expected_genuine_recall(r, lambda), 0.015)
          << "lambda=" << lambda << " r=" << r;
    }
  }
}

TEST(MemorySimulator, SameSeedSameAnswer) {
  const auto sim = world(4);
  SimulatorParams p;
  p.leak_rate = 0.5;
  p.rng_seed = 99;
  EXPECT_EQ(sim.answer_attack("case against", p), sim.answer_attack("case against", p));
}

TEST(MemorySimulator, ThresholdFiltersUnrelatedStatements) {
  MemorySimulator sim;
  const std::vector<MemoryStatement> s{
      MemoryStatement::make("alpha beta", Origin::Synthetic, false, false),
      MemoryStatement::make("gamma delta", Origin::Synthetic, false, false)};
  sim.ingest(s);
  SimulatorParams p;
  p.match_threshold = 0.5;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto* got = sim.recall("alpha beta", p, rng);
    ASSERT_NE(got, nullptr);
    EXPECT_EQ(got->text, "alpha beta");
  }
}

TEST(MemorySimulator, SlotValuesAnswerSlotQueries) {
  MemorySimulator sim;
  const std::vector<MemoryStatement> s{MemoryStatement::make(
      "case against Nimbus about patents", Origin::Synthetic, false, true, {"Nimbus", ""})};
  sim.ingest(s);
  SimulatorParams p;
  EXPECT_EQ(sim.answer_attack("case against", p, std::size_t{0}), "Nimbus");
  // Slot 1 is not stated, so the statement does not match.
  EXPECT_EQ(sim.answer_attack("case against", p, std::size_t{1}), MemorySimulator::kRefusal);
}

TEST(MemorySimulator, HintsKeepBestMatches) {
  // The genuine statement matches the hinted query best, so with k = 1 it is
  // the only candidate whenever it leaks.
  MemorySimulator sim;
  const std::vector<MemoryStatement> s{
      MemoryStatement::make("against Skyward over patents", Origin::Genuine, true, false),
      MemoryStatement::make("against Nimbus over trademarks", Origin::Synthetic, false, true),
      MemoryStatement::make("against Vertex over contracts", Origin::Synthetic, false, true)};
  sim.ingest(s);
  SimulatorParams p;
  p.leak_rate = 1.0;
  p.hinted = true;
  p.hints = 2;
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(sim.recall("against ___ over patents", p, rng)->origin, Origin::Genuine);
  }
}

TEST(ClosedForm, Values) {
  EXPECT_DOUBLE_EQ(expected_genuine_recall(3, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(expected_genuine_recall(0, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(expected_exact_forgetfulness(3, 1.0), 0.75);
  EXPECT_DOUBLE_EQ(expected_exact_forgetfulness(3, 1.0, 1), 1.0 - 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(expected_exact_forgetfulness(1, 1.0, 5), 0.0);
}
