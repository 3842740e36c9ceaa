#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace p2f {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A record or config failed schema validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Text primitives
// ---------------------------------------------------------------------------

enum class WordClass { Noun, Propn, Verb, Adj, Adv, Num, Other };

std::string_view to_string(WordClass cls);

/// A surface token with byte offsets into the source text.
struct Token {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  bool sentence_initial = false;
};

/// Normalized tokens paired one-to-one with coarse word classes.
///
/// Tokens are lowercased unless tagged PROPN, which keeps its surface case.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<WordClass> classes;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

struct TagContext {
  bool sentence_initial = false;
};

/// Splits on whitespace and punctuation. Apostrophes between word characters
/// stay inside the token; bytes >= 0x80 count as word characters.
std::vector<Token> split_tokens(std::string_view text);

/// Rule tagger: digits, closed-class lexicon, suffix rules, capitalization.
WordClass pos_tag(std::string_view token, TagContext context = {});

TokenSequence tokenize(std::string_view text);

/// Lowercased tokens with punctuation stripped. The input to every set/vector
/// metric.
std::vector<std::string> normalized_tokens(std::string_view text);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
std::string join(std::span<const std::string> parts, std::string_view sep);

/// True when both strings tokenize to the same normalized tokens.
bool normalized_equal(std::string_view a, std::string_view b);

/// True when `needle`'s normalized tokens occur as a contiguous run inside
/// `haystack`'s normalized tokens. An empty needle never matches.
bool normalized_contains(std::string_view haystack, std::string_view needle);

/// Whitespace-delimited word count.
std::size_t word_count(std::string_view text);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class Category { Business, Legal, Health, Career, Education, Social, Personal };

inline constexpr std::size_t kMaxQuestionWords = 50;

std::string_view to_string(Category category);
std::optional<Category> parse_category(std::string_view name);
/// "Business, Legal, Health, Career, Education, Social, Personal"
std::string category_list();

/// Half-open byte range [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool overlaps(const Span& other) const { return start < other.end && other.start < end; }
  bool operator==(const Span&) const = default;
};

struct PrivacyElement {
  Span span;
  std::string label;

  bool operator==(const PrivacyElement&) const = default;
};

struct QuestionRecord {
  std::string id;
  Category category = Category::Business;
  std::string text;
  std::vector<PrivacyElement> gold_elements;
  std::vector<std::string> gold_sub_questions;

  std::string element_text(std::size_t index) const;
  std::vector<std::string> gold_texts() const;

  bool operator==(const QuestionRecord&) const = default;
};

/// Throws ValidationError naming the first violated invariant.
void validate(const QuestionRecord& record);

/// A decomposed sub-question with its genuine sub-answer.
struct SubQA {
  std::string sub_question;
  std::string genuine_answer;
  std::optional<Span> answer_span;
  /// Element label (ORG, TECH, ...) when known from gold annotations.
  std::string label;

  bool operator==(const SubQA&) const = default;
};

}  // namespace p2f
