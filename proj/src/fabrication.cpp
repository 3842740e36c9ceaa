#include "p2f/fabrication.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "p2f/assets.hpp"
#include "p2f/random.hpp"

namespace p2f {
namespace {

bool is_entity_label(std::string_view label) {
  return label.empty() || label == "ORG" || label == "PERSON" || label == "PLACE" ||
         label == "DATE" || label == "NUM";
}

std::vector<std::string> parse_pool_lines(std::string_view content) {
  std::vector<std::string> out;
  std::istringstream in{std::string(content)};
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(std::move(line));
  }
  return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  return to_lower(haystack).find(needle) != std::string::npos;
}

// Strips list markers and one trailing period.
std::string clean_candidate(std::string_view line) {
  std::string_view s = line;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  if (!s.empty() && (s.front() == '-' || s.front() == '*')) s.remove_prefix(1);
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) s.remove_prefix(i + 1);
  std::string out = trim(s);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  if (!out.empty() && out.back() == '.') out.pop_back();
  return trim(out);
}

// "Sub-question 3..." -> 3, else 0.
std::size_t header_number(std::string_view line) {
  const std::string lower = to_lower(line);
  std::string_view s = lower;
  if (s.rfind("sub-question", 0) != 0 && s.rfind("sub question", 0) != 0) return 0;
  s.remove_prefix(12);
  while (!s.empty() && (s.front() == ' ' || s.front() == 's')) s.remove_prefix(1);
  std::size_t n = 0;
  bool any = false;
  while (!s.empty() && std::isdigit(static_cast<unsigned char>(s.front()))) {
    n = n * 10 + static_cast<std::size_t>(s.front() - '0');
    s.remove_prefix(1);
    any = true;
  }
  return any ? n : 0;
}

}  // namespace

IncompleteFabrication::IncompleteFabrication(std::string message,
                                             std::vector<std::size_t> deficient)
    : Error(std::move(message)), deficient_(std::move(deficient)) {}

ReplacementPool::ReplacementPool(std::map<std::string, std::vector<std::string>> entries)
    : entries_(std::move(entries)) {
  for (const auto& [label, values] : entries_) {
    if (values.empty()) throw ValidationError("replacement pool '" + label + "' is empty");
  }
}

ReplacementPool ReplacementPool::builtin() {
  std::map<std::string, std::vector<std::string>> entries;
  for (const auto& entry : assets::embedded()) {
    constexpr std::string_view prefix = "pools/";
    if (entry.path.substr(0, prefix.size()) != prefix) continue;
    std::string label(entry.path.substr(prefix.size()));
    label = label.substr(0, label.find('.'));
    entries[label] = parse_pool_lines(entry.content);
  }
  return ReplacementPool(std::move(entries));
}

ReplacementPool ReplacementPool::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ValidationError("pool directory " + dir.string() + " does not exist");
  }
  std::map<std::string, std::vector<std::string>> entries;
  for (const auto& file : std::filesystem::directory_iterator(dir)) {
    if (file.path().extension() != ".txt") continue;
    std::ifstream in(file.path());
    std::ostringstream ss;
    ss << in.rdbuf();
    entries[file.path().stem().string()] = parse_pool_lines(ss.str());
  }
  if (entries.empty()) throw ValidationError("no pool files in " + dir.string());
  return ReplacementPool(std::move(entries));
}

ReplacementPool ReplacementPool::excluding(std::span<const std::string> gold) const {
  ReplacementPool out;
  for (const auto& [label, values] : entries_) {
    auto& kept = out.entries_[label];
    for (const auto& v : values) {
      const bool hit = std::any_of(gold.begin(), gold.end(),
                                   [&](const std::string& g) { return normalized_equal(v, g); });
      if (!hit) kept.push_back(v);
    }
    if (kept.empty()) throw PoolExhausted("pool '" + label + "' is empty after excluding gold values");
  }
  return out;
}

bool ReplacementPool::has(std::string_view label) const {
  return entries_.find(std::string(label)) != entries_.end();
}

const std::vector<std::string>& ReplacementPool::values(std::string_view label) const {
  auto it = entries_.find(std::string(label));
  if (it == entries_.end()) throw InvalidArgument("no replacement pool for label '" + std::string(label) + "'");
  return it->second;
}

std::vector<Segment> replaceable_segments(std::string_view answer, std::string_view label_hint) {
  std::vector<Segment> out;
  if (is_entity_label(label_hint)) {
    const auto tokens = split_tokens(answer);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const WordClass cls = pos_tag(tokens[i].text, TagContext{tokens[i].sentence_initial});
      if (cls == WordClass::Num) {
        out.push_back({tokens[i].start, tokens[i].end, label_hint == "DATE" ? "DATE" : "NUM"});
      } else if (cls == WordClass::Propn) {
        std::size_t j = i;
        while (j + 1 < tokens.size()) {
          const auto gap = answer.substr(tokens[j].end, tokens[j + 1].start - tokens[j].end);
          if (gap.find_first_not_of(' ') != std::string_view::npos) break;
          if (pos_tag(tokens[j + 1].text, TagContext{tokens[j + 1].sentence_initial}) != WordClass::Propn) break;
          ++j;
        }
        std::string label = "ORG";
        if (label_hint == "PERSON" || label_hint == "PLACE" || label_hint == "DATE") label = label_hint;
        out.push_back({tokens[i].start, tokens[j].end, std::move(label)});
        i = j;
      }
    }
  }
  if (out.empty()) {
    const std::string t = trim(answer);
    if (!t.empty()) {
      const auto start = answer.find(t);
      out.push_back({start, start + t.size(), label_hint.empty() || label_hint == "NUM" ? "MISC" : std::string(label_hint)});
    }
  }
  return out;
}

std::vector<std::string> local_fabricate(const SubQA& sub_qa, std::size_t m,
                                         const ReplacementPool& pool, std::uint64_t seed) {
  if (m == 0) throw InvalidArgument("local_fabricate: m must be >= 1");
  const std::string& answer = sub_qa.genuine_answer;
  if (trim(answer).empty()) throw InvalidArgument("local_fabricate: genuine answer is empty");
  const auto segments = replaceable_segments(answer, sub_qa.label);

  // Segments sharing a label draw from one permutation so they never collide.
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t k = 0; k < segments.size(); ++k) by_label[segments[k].label].push_back(k);

  std::vector<std::vector<std::string>> picks(segments.size());
  for (const auto& [label, members] : by_label) {
    const auto& values = pool.values(label);
    std::vector<std::string> genuine;
    for (std::size_t k : members) {
      genuine.push_back(answer.substr(segments[k].start, segments[k].end - segments[k].start));
    }
    std::vector<const std::string*> usable;
    for (std::size_t idx : seeded_permutation(values.size(), derive_seed(seed, label))) {
      const auto& v = values[idx];
      const bool same = std::any_of(genuine.begin(), genuine.end(),
                                    [&](const std::string& g) { return normalized_equal(v, g); });
      if (!same) usable.push_back(&v);
    }
    const std::size_t need = m * members.size();
    if (usable.size() < need) {
      throw PoolExhausted("pool '" + label + "' has " + std::to_string(usable.size()) +
                          " usable values but " + std::to_string(need) + " are needed for '" +
                          answer + "'");
    }
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t t = 0; t < members.size(); ++t) {
        picks[members[t]].push_back(*usable[c * members.size() + t]);
      }
    }
  }

  std::vector<std::string> out;
  out.reserve(m);
  for (std::size_t c = 0; c < m; ++c) {
    std::string text = answer;
    for (std::size_t k = segments.size(); k-- > 0;) {
      text.replace(segments[k].start, segments[k].end - segments[k].start, picks[k][c]);
    }
    out.push_back(std::move(text));
  }
  return out;
}

std::string_view to_string(FabricationVersion version) {
  return version == FabricationVersion::V1 ? "V1" : "V2";
}

FabricationVersion parse_fabrication_version(std::string_view name) {
  if (name == "V1" || name == "v1" || name == "1") return FabricationVersion::V1;
  if (name == "V2" || name == "v2" || name == "2") return FabricationVersion::V2;
  throw InvalidArgument("unknown fabrication prompt version '" + std::string(name) + "'");
}

std::string build_fabrication_prompt(FabricationVersion version, std::size_t m, std::size_t index,
                                     const SubQA& sub_qa) {
  const auto tmpl = assets::text(version == FabricationVersion::V1 ? "prompts/fabrication_v1.txt"
                                                                   : "prompts/fabrication_v2.txt");
  return assets::render(tmpl, {{"m", std::to_string(m)}}) + "\n\nSub-question " +
         std::to_string(index + 1) + ": " + sub_qa.sub_question +
         "\nInitial sub-answer: " + sub_qa.genuine_answer;
}

std::map<std::size_t, std::vector<std::string>> parse_fabrication_reply(
    std::string_view reply, std::size_t default_number) {
  enum class Mode { Collect, Skip, Idle };
  std::map<std::size_t, std::vector<std::string>> out;
  std::size_t current = default_number;
  Mode mode = Mode::Collect;
  bool seen_header = false;

  std::istringstream in{std::string(reply)};
  for (std::string raw; std::getline(in, raw);) {
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const bool initial = contains_ci(line, "initial");
    const bool extra = contains_ci(line, "additional") || contains_ci(line, "alternative") ||
                       contains_ci(line, "generated");
    if (const std::size_t n = header_number(line); n > 0) {
      current = n;
      seen_header = true;
      mode = extra ? Mode::Collect : initial ? Mode::Skip : Mode::Idle;
      continue;
    }
    if (initial && line.find(':') != std::string::npos) {
      // "Initial Sub-answer: Our company." carries the genuine answer inline.
      mode = Mode::Skip;
      continue;
    }
    if (extra && line.back() == ':') {
      mode = Mode::Collect;
      continue;
    }
    if (mode == Mode::Collect || (!seen_header && mode != Mode::Skip)) {
      if (line == "......" || line == "...") continue;
      auto c = clean_candidate(line);
      if (!c.empty()) out[current].push_back(std::move(c));
    }
  }
  return out;
}

LocalFabricationEngine::LocalFabricationEngine(ReplacementPool pool, std::uint64_t seed)
    : pool_(std::move(pool)), seed_(seed) {}

std::vector<std::vector<std::string>> LocalFabricationEngine::generate(
    std::span<const SubQA> sub_qas, std::size_t m) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> drawn;
  for (std::size_t i = 0; i < sub_qas.size(); ++i) {
    const std::uint64_t seed = derive_seed(seed_, i);
    // Keep slots apart while the pool lasts; overlapping candidates leave
    // combination with nothing to put in the other slots.
    std::vector<std::string> got;
    try {
      got = local_fabricate(sub_qas[i], m, drawn.empty() ? pool_ : pool_.excluding(drawn), seed);
    } catch (const PoolExhausted&) {
      got = local_fabricate(sub_qas[i], m, pool_, seed);
    }
    drawn.insert(drawn.end(), got.begin(), got.end());
    out.push_back(std::move(got));
  }
  return out;
}

LlmFabricationEngine::LlmFabricationEngine(Session& session, FabricationVersion version)
    : session_(session), version_(version) {}

std::vector<std::vector<std::string>> LlmFabricationEngine::generate(
    std::span<const SubQA> sub_qas, std::size_t m) {
  if (m == 0) throw InvalidArgument("llm fabrication: m must be >= 1");
  std::vector<std::vector<std::string>> out(sub_qas.size());
  std::vector<std::size_t> deficient;
  for (std::size_t i = 0; i < sub_qas.size(); ++i) {
    const std::size_t number = i + 1;
    const auto reply = session_.query(build_fabrication_prompt(version_, m, i, sub_qas[i]));
    auto parsed = parse_fabrication_reply(reply, number);
    auto& got = out[i];
    got = std::move(parsed[number]);
    if (got.size() < m) {
      const std::string prompt =
          assets::render(assets::text("prompts/artifact/fabrication_continue.txt"),
                         {{"m", std::to_string(m)}}) +
          "\nSub-question " + std::to_string(number) + ": " + sub_qas[i].sub_question + " (" +
          std::to_string(got.size()) + " so far)";
      auto more = parse_fabrication_reply(session_.query(prompt), number);
      for (auto& c : more[number]) got.push_back(std::move(c));
    }
    if (got.size() < m) {
      deficient.push_back(i);
    } else {
      got.resize(m);
    }
  }
  if (!deficient.empty()) {
    std::string msg = "incomplete fabrication: fewer than " + std::to_string(m) +
                      " candidates for sub-question";
    for (std::size_t i : deficient) {
      msg += " " + std::to_string(i + 1) + " ('" + sub_qas[i].sub_question + "', " +
             std::to_string(out[i].size()) + ")";
    }
    throw IncompleteFabrication(msg, deficient);
  }
  return out;
}

FabricatedAnswer select_candidate(const SubQA& sub_qa, std::span<const std::string> candidates,
                                  const ConsistencyParams& params) {
  if (candidates.empty()) throw InvalidArgument("select_candidate: no candidates");
  const TokenSequence genuine = tokenize(sub_qa.genuine_answer);
  std::vector<TokenSequence> seqs;
  for (const auto& c : candidates) seqs.push_back(tokenize(c));
  const Selection sel = select_best_candidate(genuine, seqs, params);

  FabricatedAnswer out;
  bool any_distinct = false;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    out.candidates.push_back(
        {candidates[j], sel.scores[j].r_d, sel.scores[j].s_c, sel.scores[j].combined});
    any_distinct = any_distinct || sel.scores[j].r_d > 0.0;
  }
  out.chosen = sel.index;
  if (any_distinct && out.candidates[out.chosen].r_d == 0.0) {
    bool first = true;
    for (std::size_t j = 0; j < out.candidates.size(); ++j) {
      if (out.candidates[j].r_d == 0.0) continue;
      if (first || out.candidates[j].combined > out.candidates[out.chosen].combined) {
        out.chosen = j;
        first = false;
      }
    }
  }
  return out;
}

std::vector<FabricatedAnswer> fabricate_and_select(std::span<const SubQA> sub_qas, std::size_t m,
                                                   FabricationEngine& engine,
                                                   const ConsistencyParams& params) {
  const auto generated = engine.generate(sub_qas, m);
  std::vector<FabricatedAnswer> out;
  for (std::size_t i = 0; i < sub_qas.size(); ++i) {
    out.push_back(select_candidate(sub_qas[i], generated.at(i), params));
  }
  return out;
}

}  // namespace p2f
