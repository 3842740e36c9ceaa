#include "p2f/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>
#include <unordered_map>

namespace p2f {
namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }
bool is_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?'; }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Closed-class words plus a handful of frequent open-class words. Lookup is
// on the lowercased token.
const std::unordered_map<std::string_view, WordClass>& lexicon() {
  static const auto* table = [] {
    auto* m = new std::unordered_map<std::string_view, WordClass>;
    auto add = [m](WordClass cls, std::initializer_list<std::string_view> words) {
      for (auto w : words) m->emplace(w, cls);
    };
    add(WordClass::Other,
        {"a",     "an",    "the",   "and",   "or",    "but",   "nor",   "if",    "of",
         "in",    "on",    "at",    "to",    "for",   "with",  "by",    "from",  "over",
         "under", "about", "against", "into", "onto", "upon",  "as",    "than",  "that",
         "this",  "these", "those", "which", "who",   "whom",  "whose", "what",  "when",
         "where", "why",   "how",   "i",     "me",    "my",    "mine",  "we",    "us",
         "our",   "ours",  "you",   "your",  "yours", "he",    "him",   "his",   "she",
         "her",   "hers",  "it",    "its",   "they",  "them",  "their", "theirs", "there",
         "here",  "some",  "any",   "each",  "every", "all",   "both",  "either", "neither",
         "such",  "while", "after", "before", "during", "between", "through", "without",
         "within", "via",  "per",   "vs",    "because", "whether", "since", "until", "upon"});
    add(WordClass::Verb,
        {"is",     "am",     "are",    "was",    "were",   "be",     "been",   "being",
         "has",    "have",   "had",    "do",     "does",   "did",    "can",    "could",
         "will",   "would",  "shall",  "should", "may",    "might",  "must",   "get",
         "got",    "make",   "made",   "want",   "wants",  "need",   "needs",  "build",
         "create", "consider", "ensure", "avoid", "use",   "help",   "pursue", "know",
         "give",   "given",  "take",   "find",   "network", "move",  "plan",   "launch",
         "expand", "face",   "secure", "secured", "worked", "work",  "ask",    "answer",
         "forget", "remember", "refer", "hosting", "moving", "evaluating", "choosing"});
    add(WordClass::Adv,
        {"not", "very", "too", "also", "just", "only", "never", "always", "often", "soon",
         "now", "then", "again", "already", "still", "best", "well", "effectively"});
    add(WordClass::Adj,
        {"new",     "recent",  "legal",   "digital", "natural", "personal", "private",
         "public",  "key",     "different", "special", "potential", "strong", "stronger",
         "early",   "ongoing", "upcoming", "old",    "young",   "small",    "large",
         "good",    "bad",     "other",   "same",    "main",    "major",    "minor",
         "medical", "financial", "social", "corporate", "initial", "original", "correct"});
    add(WordClass::Noun,
        {"company", "case",     "question", "information", "answer",  "client",  "meeting",
         "trust",   "daughter", "son",      "parent",      "school",  "family",  "supply",
         "reply",   "year",     "years",    "month",       "product", "line",    "market",
         "markets", "team",     "firm",     "startup",     "event",   "home",    "light",
         "decor",   "data",     "software", "patent",      "dispute", "verdict", "defense",
         "storage", "cloud",    "algorithms", "technology", "strategy", "plan",   "budget",
         "engineer", "certifications", "career", "daycare", "allergy", "clients", "factors"});
    add(WordClass::Num,
        {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
         "eleven", "twelve", "twenty", "hundred", "thousand", "million", "billion", "first",
         "second", "third"});
    return m;
  }();
  return *table;
}

std::optional<WordClass> lexicon_class(std::string_view lower) {
  const auto& table = lexicon();
  if (auto it = table.find(lower); it != table.end()) return it->second;
  return std::nullopt;
}

WordClass suffix_class(std::string_view w) {
  if (w.size() > 3 && ends_with(w, "ly")) return WordClass::Adv;
  static constexpr std::array<std::string_view, 10> noun_suffixes = {
      "tion", "sion", "ment", "ness", "ity", "ance", "ence", "ship", "ism", "ist"};
  for (auto s : noun_suffixes) {
    if (w.size() > s.size() + 1 && ends_with(w, s)) return WordClass::Noun;
  }
  if (w.size() > 4 && (ends_with(w, "ize") || ends_with(w, "ify"))) return WordClass::Verb;
  if (w.size() > 4 && (ends_with(w, "ing") || ends_with(w, "ed"))) return WordClass::Verb;
  static constexpr std::array<std::string_view, 7> adj_suffixes = {"ous", "ful", "ive", "able",
                                                                   "ible", "less", "ic"};
  for (auto s : adj_suffixes) {
    if (w.size() > s.size() + 2 && ends_with(w, s)) return WordClass::Adj;
  }
  return WordClass::Other;
}

std::vector<std::string> lowered(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(to_lower(t.text));
  return out;
}

}  // namespace

std::string_view to_string(WordClass cls) {
  switch (cls) {
    case WordClass::Noun: return "NOUN";
    case WordClass::Propn: return "PROPN";
    case WordClass::Verb: return "VERB";
    case WordClass::Adj: return "ADJ";
    case WordClass::Adv: return "ADV";
    case WordClass::Num: return "NUM";
    case WordClass::Other: return "OTHER";
  }
  return "OTHER";
}

std::vector<Token> split_tokens(std::string_view text) {
  std::vector<Token> out;
  bool sentence_start = true;
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    if (!is_word_byte(c)) {
      if (is_sentence_end(text[i])) sentence_start = true;
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size()) {
      auto d = static_cast<unsigned char>(text[j]);
      if (is_word_byte(d)) {
        ++j;
      } else if (d == '\'' && j + 1 < text.size() &&
                 is_word_byte(static_cast<unsigned char>(text[j + 1]))) {
        j += 2;
      } else {
        break;
      }
    }
    out.push_back(Token{std::string(text.substr(i, j - i)), i, j, sentence_start});
    sentence_start = false;
    i = j;
  }
  return out;
}

WordClass pos_tag(std::string_view token, TagContext context) {
  if (token.empty()) throw InvalidArgument("pos_tag: empty token");
  const auto first = static_cast<unsigned char>(token.front());
  if (is_digit(first)) return WordClass::Num;
  const std::string lower = to_lower(token);
  if (lower == "i") return WordClass::Other;
  if (is_upper(first)) {
    if (!context.sentence_initial) return WordClass::Propn;
    if (auto cls = lexicon_class(lower)) return *cls;
    return WordClass::Propn;
  }
  if (auto cls = lexicon_class(lower)) return *cls;
  return suffix_class(lower);
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  for (auto& tok : split_tokens(text)) {
    const WordClass cls = pos_tag(tok.text, TagContext{tok.sentence_initial});
    seq.tokens.push_back(cls == WordClass::Propn ? std::move(tok.text) : to_lower(tok.text));
    seq.classes.push_back(cls);
  }
  return seq;
}

std::vector<std::string> normalized_tokens(std::string_view text) {
  return lowered(split_tokens(text));
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
  });
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool normalized_equal(std::string_view a, std::string_view b) {
  return normalized_tokens(a) == normalized_tokens(b);
}

bool normalized_contains(std::string_view haystack, std::string_view needle) {
  const auto hay = normalized_tokens(haystack);
  const auto pin = normalized_tokens(needle);
  if (pin.empty() || pin.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), pin.begin(), pin.end()) != hay.end();
}

std::size_t word_count(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::array<std::pair<Category, std::string_view>, 7> kCategories = {{
    {Category::Business, "Business"},
    {Category::Legal, "Legal"},
    {Category::Health, "Health"},
    {Category::Career, "Career"},
    {Category::Education, "Education"},
    {Category::Social, "Social"},
    {Category::Personal, "Personal"},
}};
}  // namespace

std::string_view to_string(Category category) {
  for (const auto& [c, name] : kCategories) {
    if (c == category) return name;
  }
  return "Business";
}

std::optional<Category> parse_category(std::string_view name) {
  for (const auto& [c, n] : kCategories) {
    if (n == name) return c;
  }
  return std::nullopt;
}

std::string category_list() {
  std::string out;
  for (const auto& [c, name] : kCategories) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

std::string QuestionRecord::element_text(std::size_t index) const {
  const auto& span = gold_elements.at(index).span;
  return text.substr(span.start, span.length());
}

std::vector<std::string> QuestionRecord::gold_texts() const {
  std::vector<std::string> out;
  out.reserve(gold_elements.size());
  for (std::size_t i = 0; i < gold_elements.size(); ++i) out.push_back(element_text(i));
  return out;
}

void validate(const QuestionRecord& record) {
  if (record.id.empty()) throw ValidationError("question id is empty");
  if (record.text.empty()) throw ValidationError("question '" + record.id + "' has empty text");
  if (const auto words = word_count(record.text); words > kMaxQuestionWords) {
    throw ValidationError("question '" + record.id + "' has " + std::to_string(words) +
                          " words; the limit is " + std::to_string(kMaxQuestionWords));
  }
  const auto& els = record.gold_elements;
  for (std::size_t i = 0; i < els.size(); ++i) {
    const auto& s = els[i].span;
    if (!(s.start < s.end && s.end <= record.text.size())) {
      throw ValidationError("question '" + record.id + "' element " + std::to_string(i) +
                            " has invalid span [" + std::to_string(s.start) + ", " +
                            std::to_string(s.end) + ")");
    }
    if (trim(record.text.substr(s.start, s.length())).empty()) {
      throw ValidationError("question '" + record.id + "' element " + std::to_string(i) +
                            " spans only whitespace");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (s.overlaps(els[j].span)) {
        throw ValidationError("question '" + record.id + "' elements " + std::to_string(j) +
                              " and " + std::to_string(i) + " overlap");
      }
    }
  }
}

}  // namespace p2f
