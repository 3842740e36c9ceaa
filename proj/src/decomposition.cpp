#include "p2f/decomposition.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "p2f/assets.hpp"

namespace p2f {
namespace {

bool istarts_with(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

void skip_space(std::string_view& s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
}

// "Sub-question:", "Sub-questions:", "Sub-question 3:", "Sub-Question 1 (...):"
bool strip_label(std::string_view& s) {
  if (!istarts_with(s, "sub-question") && !istarts_with(s, "sub question")) return false;
  const auto colon = s.find(':');
  if (colon == std::string_view::npos || colon > 40) return false;
  s.remove_prefix(colon + 1);
  skip_space(s);
  return true;
}

// "1." "1)" "1 -" "(1)" "-" "*" "Q1:" "(vSQ1)" and the bullet character.
bool strip_marker(std::string_view& s) {
  if (s.empty()) return false;
  if (s.front() == '-' || s.front() == '*') {
    s.remove_prefix(1);
    skip_space(s);
    return true;
  }
  if (s.substr(0, 3) == "\xE2\x80\xA2") {
    s.remove_prefix(3);
    skip_space(s);
    return true;
  }
  if (s.front() == '(') {
    const auto close = s.find(')');
    if (close != std::string_view::npos && close <= 8) {
      const auto inner = s.substr(1, close - 1);
      bool has_digit = false;
      for (char c : inner) has_digit |= std::isdigit(static_cast<unsigned char>(c)) != 0;
      if (has_digit) {
        s.remove_prefix(close + 1);
        skip_space(s);
        return true;
      }
    }
    return false;
  }
  std::size_t i = 0;
  if (i < s.size() && (s[i] == 'Q' || s[i] == 'q')) ++i;
  const std::size_t digits_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == digits_start || i >= s.size()) return false;
  if (s[i] == '.' || s[i] == ')' || s[i] == ':') {
    s.remove_prefix(i + 1);
    skip_space(s);
    return true;
  }
  if (s.substr(i, 3) == " - ") {
    s.remove_prefix(i + 3);
    skip_space(s);
    return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(DecompositionVersion version) {
  return version == DecompositionVersion::V1 ? "V1" : "V2";
}

DecompositionVersion parse_decomposition_version(std::string_view name) {
  if (name == "V1" || name == "v1" || name == "1") return DecompositionVersion::V1;
  if (name == "V2" || name == "v2" || name == "2") return DecompositionVersion::V2;
  throw InvalidArgument("unknown decomposition prompt version '" + std::string(name) +
                        "' (expected V1 or V2)");
}

DecompositionPrompt build_decomposition_prompt(DecompositionVersion version) {
  const char* path = version == DecompositionVersion::V1 ? "prompts/decomposition_v1.txt"
                                                          : "prompts/decomposition_v2.txt";
  return {version, assets::text(path)};
}

DecompositionParseError::DecompositionParseError(std::string raw_reply)
    : Error("no sub-questions found in reply: '" + raw_reply.substr(0, 200) + "'"),
      raw_reply_(std::move(raw_reply)) {}

DecompositionResult parse_subquestions(std::string_view reply) {
  DecompositionResult result;
  result.raw_reply = std::string(reply);
  std::set<std::vector<std::string>> seen;
  auto add = [&](std::string q) {
    q = trim(q);
    auto key = normalized_tokens(q);
    if (key.empty() || !seen.insert(key).second) return;
    SubQA sq;
    sq.sub_question = std::move(q);
    result.sub_qas.push_back(std::move(sq));
  };

  std::istringstream in{std::string(reply)};
  for (std::string raw; std::getline(in, raw);) {
    std::string line = trim(raw);
    std::string_view s = line;
    if (s.empty() || istarts_with(s, "original sentence")) continue;
    bool marked = strip_label(s);
    marked = strip_marker(s) || marked;
    if (s.empty()) continue;

    bool found = false;
    std::size_t start = 0;
    for (std::size_t q = s.find('?'); q != std::string_view::npos; q = s.find('?', start)) {
      add(std::string(s.substr(start, q - start + 1)));
      found = true;
      start = q + 1;
    }
    if (!found && marked) add(std::string(s));
  }
  if (result.sub_qas.empty()) throw DecompositionParseError(std::string(reply));
  return result;
}

MeceReport check_mece(std::span<const std::string> answers, std::span<const std::string> gold) {
  if (gold.empty()) throw InvalidArgument("check_mece: gold element list is empty");
  MeceReport report;
  report.mutually_exclusive = true;
  std::vector<bool> covered(gold.size(), false);
  std::vector<bool> claimed(gold.size(), false);
  for (const auto& answer : answers) {
    std::vector<std::size_t> elements;
    for (std::size_t j = 0; j < gold.size(); ++j) {
      if (gold_coverage(answer, gold[j]) >= 0.5) {
        elements.push_back(j);
        if (claimed[j]) report.mutually_exclusive = false;
        claimed[j] = covered[j] = true;
      }
    }
    report.element_assignment.push_back(std::move(elements));
  }
  report.collectively_exhaustive = true;
  for (bool c : covered) report.collectively_exhaustive = report.collectively_exhaustive && c;
  return report;
}

MeceReport check_mece(const DecompositionResult& result, const QuestionRecord& question) {
  std::vector<std::string> answers;
  for (const auto& sq : result.sub_qas) answers.push_back(sq.genuine_answer);
  return check_mece(answers, question.gold_texts());
}

std::vector<std::size_t> needs_refinement(std::span<const std::string> answers,
                                          std::span<const std::string> gold) {
  std::vector<std::size_t> out;
  const auto report = check_mece(answers, gold);
  for (std::size_t i = 0; i < report.element_assignment.size(); ++i) {
    if (report.element_assignment[i].size() > 1) out.push_back(i);
  }
  return out;
}

std::string build_refinement_prompt(std::string_view sub_question) {
  return assets::text("prompts/artifact/refine_decomposition.txt") + "\n" +
         std::string(sub_question);
}

PRF1 evaluate_extraction(std::span<const std::string> extracted,
                         std::span<const std::string> gold) {
  if (gold.empty()) throw InvalidArgument("evaluate_extraction: gold element list is empty");
  return prf1(extracted, gold);
}

PRF1 evaluate_extraction(const DecompositionResult& result, const QuestionRecord& question) {
  std::vector<std::string> extracted;
  for (const auto& sq : result.sub_qas) extracted.push_back(sq.genuine_answer);
  const auto gold = question.gold_texts();
  return evaluate_extraction(extracted, gold);
}

}  // namespace p2f
