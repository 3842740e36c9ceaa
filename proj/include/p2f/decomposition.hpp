#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "p2f/core.hpp"
#include "p2f/metrics.hpp"

namespace p2f {

enum class DecompositionVersion { V1, V2 };

std::string_view to_string(DecompositionVersion version);
/// Accepts "V1", "v1", "1" and likewise for V2.
DecompositionVersion parse_decomposition_version(std::string_view name);

struct DecompositionPrompt {
  DecompositionVersion version = DecompositionVersion::V2;
  std::string rendered;
};

DecompositionPrompt build_decomposition_prompt(DecompositionVersion version);

struct DecompositionResult {
  std::vector<SubQA> sub_qas;
  std::string raw_reply;
};

class DecompositionParseError : public Error {
 public:
  explicit DecompositionParseError(std::string raw_reply);
  const std::string& raw_reply() const { return raw_reply_; }

 private:
  std::string raw_reply_;
};

/// Pulls sub-questions out of a free-form reply. Handles numbered and
/// bulleted lists, "Sub-question(s):" labels, several questions on one line,
/// and "Original Sentence" echo lines (skipped). Duplicates are dropped.
DecompositionResult parse_subquestions(std::string_view reply);

struct MeceReport {
  bool mutually_exclusive = false;
  bool collectively_exhaustive = false;
  /// For each answer, the gold element indices it covers.
  std::vector<std::vector<std::size_t>> element_assignment;
};

/// An answer covers a gold element when gold_coverage >= 0.5.
MeceReport check_mece(std::span<const std::string> answers, std::span<const std::string> gold);
MeceReport check_mece(const DecompositionResult& result, const QuestionRecord& question);

/// Indices of answers covering more than one gold element.
std::vector<std::size_t> needs_refinement(std::span<const std::string> answers,
                                          std::span<const std::string> gold);

std::string build_refinement_prompt(std::string_view sub_question);

PRF1 evaluate_extraction(std::span<const std::string> extracted, std::span<const std::string> gold);
PRF1 evaluate_extraction(const DecompositionResult& result, const QuestionRecord& question);

}  // namespace p2f
