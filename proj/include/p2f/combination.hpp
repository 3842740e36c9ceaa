#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "p2f/backend.hpp"
#include "p2f/core.hpp"
#include "p2f/fabrication.hpp"

namespace p2f {

class AnchoringError : public Error {
 public:
  using Error::Error;
};

class CombinationParseError : public Error {
 public:
  explicit CombinationParseError(std::string raw_reply);
  const std::string& raw_reply() const { return raw_reply_; }

 private:
  std::string raw_reply_;
};

struct TemplateSlot {
  Span span;
  std::size_t sub_qa_index = 0;
  std::string label;
  std::string genuine;
};

/// The original question cut at its anchored sub-answers. literals has one
/// more entry than slots; slots are in text order.
struct QuestionTemplate {
  std::string original;
  std::vector<std::string> literals;
  std::vector<TemplateSlot> slots;

  std::size_t slot_count() const { return slots.size(); }
  std::vector<std::string> genuine_values() const;
  /// Interleaves literals and values. Throws InvalidArgument on a count mismatch.
  std::string render(std::span<const std::string> values) const;
  /// Slot values when `text` keeps every literal in place.
  std::optional<std::vector<std::string>> match(std::string_view text) const;
  /// Slot position of a sub-question, if it was anchored.
  std::optional<std::size_t> slot_of(std::size_t sub_qa_index) const;
};

/// First contiguous run of `answer`'s normalized tokens in `text`, as a byte
/// span, skipping runs that overlap `taken`.
std::optional<Span> locate_answer(std::string_view text, std::string_view answer,
                                  std::span<const Span> taken = {});

enum class AnchorPolicy { Strict, SkipUnanchored };

/// Anchors each sub-answer (its answer_span when set, otherwise by search).
/// Strict throws AnchoringError naming the first unanchorable answer.
QuestionTemplate build_template(const QuestionRecord& question, std::span<const SubQA> sub_qas,
                                AnchorPolicy policy = AnchorPolicy::Strict);

enum class PlanMode { ForceFake, KeepGenuine };

std::string_view to_string(PlanMode mode);
PlanMode parse_plan_mode(std::string_view name);

struct CombinationPlan {
  /// Slot positions to iterate over.
  std::vector<std::size_t> targets;
  std::size_t repeats = 3;
  PlanMode mode = PlanMode::ForceFake;
  /// Value that slot s holds in every output targeting s.
  std::vector<std::string> designated;
  /// Values slot s may take in outputs targeting another slot.
  std::vector<std::vector<std::string>> alternatives;

  std::size_t output_count() const { return targets.size() * repeats; }
};

/// Targets every slot. designated = chosen synthetic (ForceFake) or genuine
/// (KeepGenuine); alternatives = the slot's candidates minus anything that
/// contains another target's designated value.
CombinationPlan make_plan(const QuestionTemplate& tmpl,
                          std::span<const FabricatedAnswer> fabricated, std::size_t repeats = 3,
                          PlanMode mode = PlanMode::ForceFake);

struct SyntheticQuestion {
  std::string text;
  /// Slot position this output was built for, when known.
  std::optional<std::size_t> target_slot;
  std::vector<std::string> values;

  bool operator==(const SyntheticQuestion&) const = default;
};

/// targets x repeats outputs, grouped by target. Deterministic in `seed`.
std::vector<SyntheticQuestion> local_combine(const QuestionTemplate& tmpl,
                                             const CombinationPlan& plan, std::uint64_t seed);

enum class CombinationVersion { V1, V2 };

std::string_view to_string(CombinationVersion version);
CombinationVersion parse_combination_version(std::string_view name);

std::string build_combination_prompt(CombinationVersion version, std::size_t repeats);

struct ParsedCombination {
  std::string text;
  /// One-based sub-question number from a "For Sub-Question k" header.
  std::optional<std::size_t> sub_question;
};

/// Accepts quoted lines, "Ground Truth Question k:" lines, numbered items and
/// bare lines ending in '?'. Throws CombinationParseError when none is found.
std::vector<ParsedCombination> parse_combination_reply(std::string_view reply);

/// Sends the combination prompt followed by the sub-question data, then maps
/// each parsed output to a slot (from its header, or by position).
std::vector<SyntheticQuestion> llm_combine(Session& session, CombinationVersion version,
                                           const QuestionTemplate& tmpl,
                                           const CombinationPlan& plan,
                                           std::span<const SubQA> sub_qas);

enum class ViolationKind { MissingTargetValue, LeakedTargetValue, StructureMismatch };

std::string_view to_string(ViolationKind kind);

struct Violation {
  std::size_t output = 0;
  ViolationKind kind = ViolationKind::StructureMismatch;
  std::string detail;
};

struct ComplianceReport {
  std::size_t total = 0;
  std::size_t compliant = 0;
  std::vector<Violation> violations;

  double compliance() const {
    return total == 0 ? 1.0 : static_cast<double>(compliant) / static_cast<double>(total);
  }
};

/// Checks each output against its target: the target's designated value is
/// present, no other target's designated value is, and the literals match.
ComplianceReport validate_combination(std::span<const SyntheticQuestion> outputs,
                                      const CombinationPlan& plan, const QuestionTemplate& tmpl);

}  // namespace p2f
