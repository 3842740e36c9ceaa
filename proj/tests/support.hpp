// Shared fixtures for the unit and acceptance tests.
#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "p2f/assets.hpp"
#include "p2f/backend.hpp"
#include "p2f/combination.hpp"
#include "p2f/core.hpp"
#include "p2f/dataset.hpp"
#include "p2f/decomposition.hpp"
#include "p2f/fabrication.hpp"
#include "p2f/random.hpp"

namespace p2f::support {

inline std::filesystem::path repo_fixture(const std::string& name) {
  return std::filesystem::path(P2F_REPO_FIXTURES) / name;
}

inline std::filesystem::path test_data(const std::string& name) {
  return std::filesystem::path(P2F_TEST_DATA) / name;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline constexpr const char* kRefusal = "I'm sorry, I don't have that information.";

/// A question naming n people, with matching gold elements and sub-questions.
inline QuestionRecord people_question(std::size_t n) {
  static const char* names[] = {"Arlo",  "Brenna", "Cedric", "Dalia",
                                "Emery", "Farrah", "Gideon", "Hollis"};
  if (n < 1 || n > 8) throw InvalidArgument("people_question: n must be in [1, 8]");
  QuestionRecord q;
  q.id = "people-" + std::to_string(n);
  q.category = Category::Career;
  q.text = "Should ";
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) q.text += i + 1 == n ? " and " : ", ";
    const std::size_t start = q.text.size();
    q.text += names[i];
    q.gold_elements.push_back({{start, q.text.size()}, "PERSON"});
    q.gold_sub_questions.push_back("Who is person number " + std::to_string(i + 1) + "?");
  }
  q.text += " join the review committee this year?";
  return q;
}

/// Scripted backend for people_question(n): decomposition, sub-answers,
/// fact-check generation, LLM fabrication and the obfuscation reply. Anything
/// else gets kRefusal.
inline std::shared_ptr<MockBackend> people_mock(std::size_t n) {
  // Five distinct stand-ins per person so no two slots share a candidate.
  static const char* fakes[] = {
      "Quentin", "Rosalind", "Silas",   "Tamsin",  "Ulric",   "Vesper",  "Willa",   "Xander",
      "Yara",    "Zane",     "Ansel",   "Beatrix", "Corwin",  "Delphine", "Evander", "Fiona",
      "Gareth",  "Helena",   "Ingram",  "Juniper", "Kendrick", "Lorelei", "Magnus",  "Nerys",
      "Oswin",   "Priya",    "Roderick", "Saoirse", "Thaddeus", "Una",    "Viggo",   "Wren",
      "Ximena",  "Yusuf",    "Zelda",   "Ambrose", "Briony",  "Caspian", "Dorian",  "Eloise"};
  const auto q = people_question(n);
  auto mock = std::make_shared<MockBackend>();
  mock->on_exact(q.text, "Pick people with complementary skills.");
  const auto decomposition = build_decomposition_prompt(DecompositionVersion::V2).rendered;
  std::string listing = "Sub-questions:";
  std::string checks;
  for (std::size_t i = 0; i < n; ++i) {
    listing += "\n" + std::to_string(i + 1) + ". " + q.gold_sub_questions[i];
    checks += std::to_string(i + 1) + ". Can you confirm the name of person " +
              std::to_string(i + 1) + "?\n";
    const auto answer = q.element_text(i);
    mock->on_exact(q.gold_sub_questions[i], answer + ".");
    std::string generated = "Generated sub-answers:";
    for (std::size_t k = 0; k < 5; ++k) {
      generated += "\n" + std::to_string(k + 1) + ". " + fakes[i * 5 + k];
    }
    mock->on_contains("Initial sub-answer: " + answer, generated);
  }
  mock->on_exact(decomposition, listing);
  mock->on_prefix(assets::text("prompts/artifact/attack_generation.txt"), checks);
  mock->on_contains("In ALL of the subsequent interactions", "Understood.");
  mock->otherwise(kRefusal);
  return mock;
}


struct CombinationCase {
  QuestionRecord question;
  std::vector<SubQA> sub_qas;
  QuestionTemplate tmpl;
  std::vector<FabricatedAnswer> fabricated;
  CombinationPlan plan;
};

/// Gold-anchored template, locally fabricated candidates and a force-fake plan.
inline CombinationCase combination_case(const QuestionRecord& q, std::size_t repeats,
                                        std::uint64_t seed, std::size_t m = 5) {
  CombinationCase c;
  c.question = q;
  c.sub_qas = sub_qas_from_gold(q);
  c.tmpl = build_template(q, c.sub_qas);
  const auto pool = ReplacementPool::builtin().excluding(q.gold_texts());
  LocalFabricationEngine engine(pool, seed);
  c.fabricated = fabricate_and_select(c.sub_qas, m, engine);
  c.plan = make_plan(c.tmpl, c.fabricated, repeats);
  return c;
}

/// 100 combined questions over the legal case (4 slots x 25 repeats) with
/// 47 of them corrupted, cycling through a missing target value, a leaked
/// target value and a broken literal.
struct PlantedCorpus {
  CombinationCase base;
  std::vector<SyntheticQuestion> outputs;
  std::vector<std::size_t> planted;
};

inline PlantedCorpus planted_corpus(std::uint64_t seed = 5) {
  PlantedCorpus pc;
  pc.base = combination_case(legal_case_fixture(), 25, seed);
  const auto& tmpl = pc.base.tmpl;
  const auto& plan = pc.base.plan;
  pc.outputs = local_combine(tmpl, plan, seed);
  const auto order = seeded_permutation(pc.outputs.size(), derive_seed(seed, "planted"));
  for (std::size_t k = 0; k < 47; ++k) {
    const std::size_t i = order[k];
    auto& out = pc.outputs[i];
    const std::size_t target = *out.target_slot;
    switch (k % 3) {
      case 0:
        out.values[target] = tmpl.slots[target].genuine;
        out.text = tmpl.render(out.values);
        break;
      case 1: {
        const std::size_t other = (target + 1) % tmpl.slot_count();
        out.values[other] = plan.designated[other];
        out.text = tmpl.render(out.values);
        break;
      }
      default:
        out.text = "Honestly, " + out.text;
        break;
    }
    pc.planted.push_back(i);
  }
  return pc;
}

}  // namespace p2f::support
