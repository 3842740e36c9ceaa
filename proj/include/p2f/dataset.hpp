#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "p2f/core.hpp"

namespace p2f {

/// A corpus record failed to load. The message starts with "<source>:<line>:".
class CorpusError : public ValidationError {
 public:
  CorpusError(std::string source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One JSON object per line: {id, category, text, gold_elements: [{start, end,
/// label}], gold_sub_questions?}. Blank lines are skipped. Every record is
/// validated and ids must be unique.
std::vector<QuestionRecord> parse_corpus(std::string_view content,
                                         std::string_view source = "<corpus>");
std::vector<QuestionRecord> load_corpus(const std::filesystem::path& path);

std::string serialize_record(const QuestionRecord& record);
std::string serialize_corpus(std::span<const QuestionRecord> records);
void save_corpus(std::span<const QuestionRecord> records, const std::filesystem::path& path);

struct ScaffoldSlot {
  std::string name;
  std::string label;
  std::string question;
  std::vector<std::string> values;
};

struct ScaffoldTemplate {
  Category category = Category::Business;
  std::string name;
  /// Text with "{slot}" placeholders.
  std::string text;
  /// In order of first appearance in `text`.
  std::vector<ScaffoldSlot> slots;
};

std::vector<ScaffoldTemplate> parse_scaffold_templates(std::string_view json_text);
std::vector<ScaffoldTemplate> load_scaffold_templates(const std::filesystem::path& path);
/// The reconstructed templates shipped under assets/scaffold.
std::vector<ScaffoldTemplate> builtin_scaffold_templates();

/// Renders `values` (one per slot) and records the gold span of each.
QuestionRecord render_scaffold(const ScaffoldTemplate& tmpl, std::span<const std::string> values,
                               std::string id);

/// per_category records for every category that has templates, ids
/// "<category>-NNN". Value combinations are drawn without repetition while
/// they last. Deterministic in `seed`.
std::vector<QuestionRecord> scaffold_generate(std::span<const ScaffoldTemplate> templates,
                                              std::size_t per_category, std::uint64_t seed);

/// The legal-case question used throughout the worked examples, with four
/// gold elements and their sub-questions.
QuestionRecord legal_case_fixture();

/// One SubQA per gold element, anchored to its span.
std::vector<SubQA> sub_qas_from_gold(const QuestionRecord& record);

}  // namespace p2f
