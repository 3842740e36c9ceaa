#include "p2f/dataset.hpp"

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "p2f/assets.hpp"
#include "p2f/random.hpp"

namespace p2f {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QuestionRecord record_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("record is not a JSON object");
  QuestionRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    const auto cat = j.at("category").get<std::string>();
    const auto parsed = parse_category(cat);
    if (!parsed) {
      throw ValidationError("unknown category '" + cat + "' (valid: " + category_list() + ")");
    }
    r.category = *parsed;
    r.text = j.at("text").get<std::string>();
    for (const auto& e : j.at("gold_elements")) {
      const auto start = e.at("start").get<long long>();
      const auto end = e.at("end").get<long long>();
      if (start < 0 || end < 0) throw ValidationError("negative span offset");
      r.gold_elements.push_back(
          {{static_cast<std::size_t>(start), static_cast<std::size_t>(end)},
           e.at("label").get<std::string>()});
    }
    if (j.contains("gold_sub_questions")) {
      r.gold_sub_questions = j.at("gold_sub_questions").get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed record: ") + e.what());
  }
  validate(r);
  return r;
}

std::string noun_for(std::string_view label) {
  if (label == "ORG") return "organization";
  if (label == "PERSON") return "person";
  if (label == "PLACE") return "place";
  if (label == "TECH") return "technology";
  if (label == "DATE") return "date";
  if (label == "NUM") return "number";
  return "detail";
}

}  // namespace

CorpusError::CorpusError(std::string source, std::size_t line, const std::string& what)
    : ValidationError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::vector<QuestionRecord> parse_corpus(std::string_view content, std::string_view source) {
  std::vector<QuestionRecord> out;
  std::set<std::string> ids;
  std::istringstream in{std::string(content)};
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (trim(line).empty()) continue;
    QuestionRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
      throw CorpusError(std::string(source), lineno, std::string("invalid JSON: ") + e.what());
    } catch (const ValidationError& e) {
      throw CorpusError(std::string(source), lineno, e.what());
    }
    if (!ids.insert(r.id).second) {
      throw CorpusError(std::string(source), lineno, "duplicate id '" + r.id + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<QuestionRecord> load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path), path.string());
}

std::string serialize_record(const QuestionRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["category"] = std::string(to_string(r.category));
  j["text"] = r.text;
  j["gold_elements"] = ordered_json::array();
  for (const auto& e : r.gold_elements) {
    j["gold_elements"].push_back({{"start", e.span.start}, {"end", e.span.end}, {"label", e.label}});
  }
  if (!r.gold_sub_questions.empty()) j["gold_sub_questions"] = r.gold_sub_questions;
  return j.dump();
}

std::string serialize_corpus(std::span<const QuestionRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

void save_corpus(std::span<const QuestionRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << serialize_corpus(records);
}

std::vector<ScaffoldTemplate> parse_scaffold_templates(std::string_view json_text) {
  std::vector<ScaffoldTemplate> out;
  try {
    const auto doc = json::parse(json_text);
    for (const auto& t : doc.at("templates")) {
      ScaffoldTemplate tmpl;
      const auto cat = t.at("category").get<std::string>();
      const auto parsed = parse_category(cat);
      if (!parsed) throw ValidationError("scaffold template has unknown category '" + cat + "'");
      tmpl.category = *parsed;
      tmpl.name = t.at("name").get<std::string>();
      tmpl.text = t.at("text").get<std::string>();
      const auto& slots = t.at("slots");
      for (std::size_t pos = tmpl.text.find('{'); pos != std::string::npos;
           pos = tmpl.text.find('{', pos + 1)) {
        const auto close = tmpl.text.find('}', pos);
        if (close == std::string::npos) break;
        const std::string name = tmpl.text.substr(pos + 1, close - pos - 1);
        if (!slots.contains(name)) {
          throw ValidationError("template '" + tmpl.name + "' uses undefined slot '" + name + "'");
        }
        const auto& s = slots.at(name);
        ScaffoldSlot slot{name, s.at("label").get<std::string>(), s.value("question", ""),
                          s.at("values").get<std::vector<std::string>>()};
        if (slot.values.empty()) {
          throw ValidationError("slot '" + name + "' of template '" + tmpl.name + "' has no values");
        }
        tmpl.slots.push_back(std::move(slot));
      }
      out.push_back(std::move(tmpl));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed scaffold templates: ") + e.what());
  }
  return out;
}

std::vector<ScaffoldTemplate> load_scaffold_templates(const std::filesystem::path& path) {
  return parse_scaffold_templates(read_file(path));
}

std::vector<ScaffoldTemplate> builtin_scaffold_templates() {
  return parse_scaffold_templates(assets::raw("scaffold/templates.json"));
}

QuestionRecord render_scaffold(const ScaffoldTemplate& tmpl, std::span<const std::string> values,
                               std::string id) {
  if (values.size() != tmpl.slots.size()) {
    throw InvalidArgument("template '" + tmpl.name + "' needs " +
                          std::to_string(tmpl.slots.size()) + " values");
  }
  QuestionRecord r;
  r.id = std::move(id);
  r.category = tmpl.category;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < tmpl.slots.size(); ++k) {
    const auto open = tmpl.text.find('{', pos);
    const auto close = tmpl.text.find('}', open);
    r.text += tmpl.text.substr(pos, open - pos);
    const std::size_t start = r.text.size();
    r.text += values[k];
    r.gold_elements.push_back({{start, r.text.size()}, tmpl.slots[k].label});
    r.gold_sub_questions.push_back(tmpl.slots[k].question);
    pos = close + 1;
  }
  r.text += tmpl.text.substr(pos);
  if (word_count(r.text) > kMaxQuestionWords) {
    throw ValidationError("template '" + tmpl.name + "' renders " +
                          std::to_string(word_count(r.text)) + " words; the limit is " +
                          std::to_string(kMaxQuestionWords));
  }
  validate(r);
  return r;
}

std::vector<QuestionRecord> scaffold_generate(std::span<const ScaffoldTemplate> templates,
                                              std::size_t per_category, std::uint64_t seed) {
  if (per_category == 0) throw InvalidArgument("scaffold_generate: per_category must be >= 1");
  std::map<Category, std::vector<const ScaffoldTemplate*>> by_category;
  for (const auto& t : templates) by_category[t.category].push_back(&t);

  std::vector<QuestionRecord> out;
  for (const auto& [category, group] : by_category) {
    std::vector<std::vector<std::size_t>> orders;
    for (const auto* t : group) {
      std::size_t combos = 1;
      for (const auto& s : t->slots) combos *= s.values.size();
      orders.push_back(seeded_permutation(combos, derive_seed(seed, t->name)));
    }
    for (std::size_t k = 0; k < per_category; ++k) {
      const std::size_t which = k % group.size();
      const auto& t = *group[which];
      const auto& order = orders[which];
      std::size_t combo = order[(k / group.size()) % order.size()];
      std::vector<std::string> values;
      for (const auto& s : t.slots) {
        values.push_back(s.values[combo % s.values.size()]);
        combo /= s.values.size();
      }
      char id[64];
      std::snprintf(id, sizeof id, "%s-%03zu", to_lower(to_string(category)).c_str(), k + 1);
      out.push_back(render_scaffold(t, values, id));
    }
  }
  return out;
}

QuestionRecord legal_case_fixture() {
  QuestionRecord r;
  r.id = "legal-case";
  r.category = Category::Legal;
  r.text =
      "Our company has an ongoing legal case against Skyward Solutions over a patent dispute on "
      "cloud storage algorithms. Given the recent verdict in the Johnson vs. DataStack case, how "
      "can we build a stronger defense?";
  auto add = [&r](std::string_view value, std::string label, std::string question) {
    const auto start = r.text.find(value);
    r.gold_elements.push_back({{start, start + value.size()}, std::move(label)});
    r.gold_sub_questions.push_back(std::move(question));
  };
  add("Skyward Solutions", "ORG", "Who is the case against?");
  add("patent dispute", "MISC", "What is the nature of the legal case?");
  add("cloud storage algorithms", "TECH", "What technology is the patent dispute about?");
  add("Johnson vs. DataStack", "MISC", "What is the recent case that might be relevant?");
  validate(r);
  return r;
}

std::vector<SubQA> sub_qas_from_gold(const QuestionRecord& record) {
  std::vector<SubQA> out;
  for (std::size_t i = 0; i < record.gold_elements.size(); ++i) {
    const auto& e = record.gold_elements[i];
    SubQA sq;
    sq.sub_question = i < record.gold_sub_questions.size() && !record.gold_sub_questions[i].empty()
                          ? record.gold_sub_questions[i]
                          : "What is the " + noun_for(e.label) + " mentioned?";
    sq.genuine_answer = record.element_text(i);
    sq.answer_span = e.span;
    sq.label = e.label;
    out.push_back(std::move(sq));
  }
  return out;
}

}  // namespace p2f
