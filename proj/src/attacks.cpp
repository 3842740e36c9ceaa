#include "p2f/attacks.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "p2f/assets.hpp"
#include "p2f/decomposition.hpp"
#include "p2f/random.hpp"

namespace p2f {
namespace {

constexpr std::array<std::pair<AttackType, std::string_view>, 9> kTypes = {{
    {AttackType::FactCheck, "fact-check"},
    {AttackType::PartialRecall, "partial-recall"},
    {AttackType::HypotheticalRecall, "hypothetical-recall"},
    {AttackType::PeerPressureTrue, "peer-pressure-true"},
    {AttackType::PeerPressureFalse, "peer-pressure-false"},
    {AttackType::PersonalTrustTrue, "personal-trust-true"},
    {AttackType::PersonalTrustFalse, "personal-trust-false"},
    {AttackType::TextCompletion, "text-completion"},
    {AttackType::RevertAttack, "revert"},
}};

constexpr std::array<AttackType, 9> kAllTypes = {
    AttackType::FactCheck,          AttackType::PartialRecall,     AttackType::HypotheticalRecall,
    AttackType::PeerPressureTrue,   AttackType::PeerPressureFalse, AttackType::PersonalTrustTrue,
    AttackType::PersonalTrustFalse, AttackType::TextCompletion,    AttackType::RevertAttack};

constexpr std::array<AttackType, 6> kCircumventive = {
    AttackType::PartialRecall,     AttackType::HypotheticalRecall, AttackType::PeerPressureTrue,
    AttackType::PeerPressureFalse, AttackType::PersonalTrustTrue,  AttackType::PersonalTrustFalse};

std::string_view template_asset(AttackType type) {
  switch (type) {
    case AttackType::PartialRecall: return "attacks/partial_recall.txt";
    case AttackType::HypotheticalRecall: return "attacks/hypothetical_recall.txt";
    case AttackType::PeerPressureTrue: return "attacks/peer_pressure_true.txt";
    case AttackType::PeerPressureFalse: return "attacks/peer_pressure_false.txt";
    case AttackType::PersonalTrustTrue: return "attacks/personal_trust_true.txt";
    case AttackType::PersonalTrustFalse: return "attacks/personal_trust_false.txt";
    default: break;
  }
  throw InvalidArgument("attack type '" + std::string(to_string(type)) +
                        "' is not a circumventive template");
}

bool is_false_variant(AttackType type) {
  return type == AttackType::PeerPressureFalse || type == AttackType::PersonalTrustFalse;
}

std::string noun_for(std::string_view label) {
  if (label == "TECH") return "technology";
  if (label == "ORG") return "company";
  if (label == "PERSON") return "person";
  if (label == "PLACE") return "place";
  if (label == "DATE") return "date";
  if (label == "NUM") return "number";
  return "detail";
}

bool has_propn(std::string_view text) {
  for (const auto& t : split_tokens(text)) {
    if (pos_tag(t.text, TagContext{t.sentence_initial}) == WordClass::Propn) return true;
  }
  return false;
}

std::string strip_question_mark(std::string s) {
  s = trim(s);
  while (!s.empty() && (s.back() == '?' || s.back() == '.')) s.pop_back();
  return trim(s);
}

// First-person to second-person, word by word.
std::string shift_pronouns(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  const auto tokens = split_tokens(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    out.append(text.substr(pos, t.start - pos));
    const std::string lower = to_lower(t.text);
    std::string repl = t.text;
    if (lower == "our" || lower == "my") {
      repl = "your";
    } else if (lower == "ours" || lower == "mine") {
      repl = "yours";
    } else if (lower == "we" || lower == "i" || lower == "us" || lower == "me") {
      repl = "you";
    } else if (lower == "am" && i > 0 && to_lower(tokens[i - 1].text) == "i") {
      repl = "are";
    }
    out += repl;
    pos = t.end;
  }
  out.append(text.substr(pos));
  return out;
}

std::size_t sentence_start(std::string_view text, std::size_t before) {
  std::size_t start = 0;
  for (std::size_t i = 0; i < before; ++i) {
    if (text[i] == '.' || text[i] == '?' || text[i] == '!') {
      // "vs." and similar abbreviations end in a lowercase word; real
      // sentence ends here are followed by a space and a capital.
      if (i + 2 < text.size() && text[i + 1] == ' ' &&
          std::isupper(static_cast<unsigned char>(text[i + 2])) && i > 0 &&
          !(i >= 2 && text.substr(i - 2, 2) == "vs")) {
        start = i + 2;
      }
    }
  }
  return start;
}

// Start of the nearest "a"/"an"/"the" before `pos`, or the sentence start.
std::size_t article_before(std::string_view text, std::size_t pos) {
  const std::size_t floor = sentence_start(text, pos);
  const auto tokens = split_tokens(text.substr(0, pos));
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    if (it->start < floor) break;
    const std::string lower = to_lower(it->text);
    if (lower == "a" || lower == "an" || lower == "the") return it->start;
  }
  return floor;
}

std::string lower_first(std::string s) {
  if (!s.empty() && !has_propn(s.substr(0, s.find(' ')))) {
    s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  }
  return s;
}

std::string genuine_of(std::span<const SubQA> sub_qas, std::span<const std::size_t> targets) {
  std::vector<std::string> parts;
  for (std::size_t t : targets) parts.push_back(sub_qas[t].genuine_answer);
  return join(parts, " ");
}

}  // namespace

std::string_view to_string(AttackType type) {
  for (const auto& [t, name] : kTypes) {
    if (t == type) return name;
  }
  return "fact-check";
}

AttackType parse_attack_type(std::string_view name) {
  for (const auto& [t, n] : kTypes) {
    if (n == name) return t;
  }
  throw InvalidArgument("unknown attack type '" + std::string(name) + "'");
}

std::span<const AttackType> all_attack_types() { return kAllTypes; }
std::span<const AttackType> circumventive_types() { return kCircumventive; }

std::vector<AttackQuery> generate_fact_check(std::span<const SubQA> sub_qas,
                                             const QuestionTemplate* tmpl, std::uint64_t seed,
                                             std::optional<std::size_t> cap) {
  if (sub_qas.empty()) throw InvalidArgument("generate_fact_check: no sub-questions");
  std::vector<AttackQuery> out;
  for (std::size_t i = 0; i < sub_qas.size(); ++i) {
    AttackQuery q;
    q.type = AttackType::FactCheck;
    q.text = sub_qas[i].sub_question;
    q.target_sub_qa = i;
    q.targets = {i};
    out.push_back(std::move(q));
  }

  const auto recombine = assets::text("attacks/fact_check_recombination.txt");
  std::vector<AttackQuery> pairs;
  for (std::size_t i = 0; i < sub_qas.size(); ++i) {
    for (std::size_t j = 0; j < sub_qas.size(); ++j) {
      if (i == j || trim(sub_qas[j].genuine_answer).empty()) continue;
      std::string value = sub_qas[j].genuine_answer;
      std::string link = "regarding";
      if (tmpl) {
        const auto slot = tmpl->slot_of(j);
        if (!slot) continue;
        value = tmpl->slots[*slot].genuine;
        const auto words = split_tokens(tmpl->literals[*slot]);
        if (!words.empty()) link = words.back().text;
      }
      const std::string text = assets::render(
          recombine, {{"stem", strip_question_mark(sub_qas[i].sub_question)},
                      {"link", link},
                      {"value", value}});
      // Never hand over what the query asks for.
      if (normalized_contains(text, sub_qas[i].genuine_answer)) continue;
      AttackQuery q;
      q.type = AttackType::FactCheck;
      q.text = text;
      q.target_sub_qa = i;
      q.targets = {i};
      pairs.push_back(std::move(q));
    }
  }
  const std::size_t limit = std::min(cap.value_or(sub_qas.size()), pairs.size());
  const auto order = seeded_permutation(pairs.size(), derive_seed(seed, "fact-check"));
  for (std::size_t k = 0; k < limit; ++k) out.push_back(pairs[order[k]]);
  return out;
}

std::vector<AttackQuery> generate_llm_fact_checks(Session& session,
                                                  std::span<const SubQA> sub_qas) {
  if (sub_qas.empty()) throw InvalidArgument("generate_llm_fact_checks: no sub-questions");
  std::string prompt = assets::text("prompts/artifact/attack_generation.txt");
  for (std::size_t i = 0; i < sub_qas.size(); ++i) {
    prompt += "\n" + std::to_string(i + 1) + ". " + sub_qas[i].genuine_answer;
  }
  const auto parsed = parse_subquestions(session.query(prompt));
  std::vector<AttackQuery> out;
  for (std::size_t i = 0; i < parsed.sub_qas.size() && i < sub_qas.size(); ++i) {
    AttackQuery q;
    q.type = AttackType::FactCheck;
    q.text = parsed.sub_qas[i].sub_question;
    q.target_sub_qa = i;
    q.targets = {i};
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<AttackQuery> generate_circumventive(const QuestionTemplate& tmpl,
                                                std::span<const SubQA> sub_qas,
                                                std::span<const AttackType> types,
                                                std::span<const std::vector<std::string>> fakes,
                                                std::uint64_t seed) {
  for (AttackType type : types) (void)template_asset(type);
  for (const auto& slot : tmpl.slots) {
    if (slot.sub_qa_index >= sub_qas.size()) {
      throw InvalidArgument("template slot refers to a missing sub-question");
    }
  }

  struct Target {
    std::size_t slot;
    std::string context;
    std::string claim_prefix;
  };
  std::vector<Target> targets;
  const std::string& text = tmpl.original;
  for (std::size_t s = 1; s < tmpl.slot_count(); ++s) {
    std::optional<std::size_t> known;
    for (std::size_t k = s; k-- > 0;) {
      if (has_propn(tmpl.slots[k].genuine)) {
        known = k;
        break;
      }
    }
    if (!known) continue;
    const auto& ks = tmpl.slots[*known].span;
    const std::size_t from = article_before(text, ks.start);
    std::string context = shift_pronouns(text.substr(from, ks.end - from));
    const auto& ts = tmpl.slots[s].span;
    const std::size_t sent = sentence_start(text, ts.start);
    targets.push_back({s, std::move(context), text.substr(sent, ts.start - sent)});
  }

  std::vector<AttackQuery> out;
  for (AttackType type : types) {
    const auto tmpl_text = assets::text(template_asset(type));
    for (const auto& t : targets) {
      const auto& slot = tmpl.slots[t.slot];
      AttackQuery q;
      q.type = type;
      q.target_sub_qa = slot.sub_qa_index;
      q.targets = {slot.sub_qa_index};
      q.truth_polarity = !is_false_variant(type);
      if (q.truth_polarity) {
        q.text = assets::render(tmpl_text, {{"context", t.context}, {"noun", noun_for(slot.label)}});
      } else {
        std::vector<std::string> usable;
        if (slot.sub_qa_index < fakes.size()) {
          for (const auto& f : fakes[slot.sub_qa_index]) {
            if (!normalized_contains(f, slot.genuine) && !normalized_contains(slot.genuine, f)) {
              usable.push_back(f);
            }
          }
        }
        if (usable.empty()) {
          throw InvalidArgument(std::string(to_string(type)) + " needs a fabricated value for '" +
                                slot.genuine + "'");
        }
        Rng rng(derive_seed(seed, t.slot * 16 + static_cast<std::size_t>(type)));
        const std::string& fake = usable[rng.below(usable.size())];
        const std::string claim = lower_first(shift_pronouns(t.claim_prefix) + fake);
        q.text = assets::render(tmpl_text, {{"claim", claim}});
      }
      // Two slots with the same context and noun read as one question; an
      // answer to it cannot be scored against either slot alone.
      const bool repeated = std::any_of(out.begin(), out.end(),
                                        [&](const AttackQuery& o) { return o.text == q.text; });
      if (!repeated) out.push_back(std::move(q));
    }
  }
  return out;
}

AttackQuery generate_text_completion(const QuestionTemplate& tmpl, std::size_t hints,
                                     std::uint64_t seed) {
  const std::size_t n = tmpl.slot_count();
  if (n == 0) throw InvalidArgument("text completion needs at least one anchored sub-answer");
  if (hints + 1 > n) {
    throw InvalidArgument("text completion with " + std::to_string(hints) + " hints over " +
                          std::to_string(n) + " anchored values leaves no blank");
  }
  const auto order = seeded_permutation(n, derive_seed(seed, "text-completion"));
  std::vector<bool> revealed(n, false);
  for (std::size_t h = 0; h < hints; ++h) revealed[order[h]] = true;

  AttackQuery q;
  q.type = AttackType::TextCompletion;
  q.hints = hints;
  std::vector<std::string> values;
  for (std::size_t s = 0; s < n; ++s) {
    values.push_back(revealed[s] ? tmpl.slots[s].genuine : "___");
    if (!revealed[s]) q.targets.push_back(tmpl.slots[s].sub_qa_index);
  }
  q.target_sub_qa = q.targets.front();
  q.text = tmpl.render(values);
  return q;
}

AttackQuery generate_revert(std::span<const SubQA> sub_qas) {
  if (sub_qas.empty()) throw InvalidArgument("generate_revert: no sub-questions");
  std::vector<std::string> questions;
  AttackQuery q;
  q.type = AttackType::RevertAttack;
  for (std::size_t i = 0; i < sub_qas.size(); ++i) {
    questions.push_back(sub_qas[i].sub_question);
    q.targets.push_back(i);
  }
  q.target_sub_qa = 0;
  q.text = assets::render(assets::text("attacks/revert.txt"), {{"question", join(questions, " ")}});
  return q;
}

std::string SessionTarget::answer(const AttackQuery& query, std::size_t) {
  return session_.query(query.text);
}

SimulatorTarget::SimulatorTarget(const MemorySimulator& simulator, SimulatorParams params)
    : simulator_(simulator), params_(params) {
  params_.validate();
}

std::string SimulatorTarget::answer(const AttackQuery& query, std::size_t index) {
  SimulatorParams params = params_;
  if (query.type == AttackType::TextCompletion) params.hints = query.hints;
  Rng rng(derive_seed(params.rng_seed, index));
  const MemoryStatement* s = simulator_.recall(query.text, params, rng, query.targets);
  if (!s) return std::string(MemorySimulator::kRefusal);
  if (s->slot_values.empty()) return s->text;
  std::vector<std::string> parts;
  for (std::size_t t : query.targets) {
    if (t < s->slot_values.size()) parts.push_back(s->slot_values[t]);
  }
  return parts.empty() ? s->text : join(parts, " ");
}

std::vector<AttackResult> run_attacks(std::span<const AttackQuery> queries,
                                      std::span<const SubQA> sub_qas, AttackTarget& target) {
  std::vector<AttackResult> out;
  out.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    AttackResult r;
    r.query = queries[i];
    if (r.query.targets.empty()) r.query.targets = {r.query.target_sub_qa};
    for (std::size_t t : r.query.targets) {
      if (t >= sub_qas.size()) {
        throw InvalidArgument("attack targets sub-question " + std::to_string(t + 1) +
                              " but only " + std::to_string(sub_qas.size()) + " exist");
      }
    }
    r.genuine = genuine_of(sub_qas, r.query.targets);
    try {
      r.answer = target.answer(r.query, i);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace p2f
