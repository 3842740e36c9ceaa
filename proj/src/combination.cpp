#include "p2f/combination.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include "p2f/assets.hpp"
#include "p2f/random.hpp"

namespace p2f {
namespace {

bool conflicts(std::string_view a, std::string_view b) {
  return normalized_contains(a, b) || normalized_contains(b, a);
}

std::string strip_quotes(std::string s) {
  s = trim(s);
  auto strip_pair = [&s](std::string_view open, std::string_view close) {
    if (s.size() >= open.size() + close.size() && s.compare(0, open.size(), open) == 0 &&
        s.compare(s.size() - close.size(), close.size(), close) == 0) {
      s = trim(s.substr(open.size(), s.size() - open.size() - close.size()));
      return true;
    }
    return false;
  };
  strip_pair("\"", "\"") || strip_pair("\xE2\x80\x9C", "\xE2\x80\x9D") || strip_pair("'", "'");
  return s;
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && to_lower(s.substr(0, prefix.size())) == prefix;
}

// Number after a fixed lowercase prefix, e.g. "for sub-question 2:" -> 2.
std::optional<std::size_t> number_after(std::string_view line, std::string_view prefix) {
  if (!istarts_with(line, prefix)) return std::nullopt;
  std::string_view s = line.substr(prefix.size());
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  std::size_t n = 0;
  bool any = false;
  while (!s.empty() && std::isdigit(static_cast<unsigned char>(s.front()))) {
    n = n * 10 + static_cast<std::size_t>(s.front() - '0');
    s.remove_prefix(1);
    any = true;
  }
  if (!any) return std::nullopt;
  return n;
}

}  // namespace

CombinationParseError::CombinationParseError(std::string raw_reply)
    : Error("no synthetic questions found in reply: '" + raw_reply.substr(0, 200) + "'"),
      raw_reply_(std::move(raw_reply)) {}

std::vector<std::string> QuestionTemplate::genuine_values() const {
  std::vector<std::string> out;
  for (const auto& s : slots) out.push_back(s.genuine);
  return out;
}

std::string QuestionTemplate::render(std::span<const std::string> values) const {
  if (values.size() != slots.size()) {
    throw InvalidArgument("template has " + std::to_string(slots.size()) + " slots but " +
                          std::to_string(values.size()) + " values were given");
  }
  std::string out = literals.at(0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += values[i];
    out += literals[i + 1];
  }
  return out;
}

std::optional<std::vector<std::string>> QuestionTemplate::match(std::string_view text) const {
  if (text.substr(0, literals[0].size()) != literals[0]) return std::nullopt;
  std::size_t pos = literals[0].size();
  std::vector<std::string> values;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const std::string& next = literals[k + 1];
    std::size_t end;
    if (k + 1 == slots.size()) {
      if (text.size() < pos + next.size() ||
          text.substr(text.size() - next.size()) != next) {
        return std::nullopt;
      }
      end = text.size() - next.size();
    } else {
      if (next.empty()) return std::nullopt;
      end = text.find(next, pos + 1);
      if (end == std::string_view::npos) return std::nullopt;
    }
    if (end <= pos) return std::nullopt;
    values.emplace_back(text.substr(pos, end - pos));
    pos = end + next.size();
  }
  if (slots.empty() && text.size() != literals[0].size()) return std::nullopt;
  return values;
}

std::optional<std::size_t> QuestionTemplate::slot_of(std::size_t sub_qa_index) const {
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (slots[s].sub_qa_index == sub_qa_index) return s;
  }
  return std::nullopt;
}

std::optional<Span> locate_answer(std::string_view text, std::string_view answer,
                                  std::span<const Span> taken) {
  const auto needle = normalized_tokens(answer);
  if (needle.empty()) return std::nullopt;
  const auto tokens = split_tokens(text);
  std::vector<std::string> hay;
  for (const auto& t : tokens) hay.push_back(to_lower(t.text));
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (!std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) {
      continue;
    }
    const Span span{tokens[i].start, tokens[i + needle.size() - 1].end};
    const bool clash =
        std::any_of(taken.begin(), taken.end(), [&](const Span& t) { return t.overlaps(span); });
    if (!clash) return span;
  }
  return std::nullopt;
}

QuestionTemplate build_template(const QuestionRecord& question, std::span<const SubQA> sub_qas,
                                AnchorPolicy policy) {
  std::vector<TemplateSlot> slots;
  std::vector<Span> taken;
  for (std::size_t i = 0; i < sub_qas.size(); ++i) {
    const auto& sq = sub_qas[i];
    std::optional<Span> span;
    if (sq.answer_span) {
      const Span s = *sq.answer_span;
      if (s.start >= s.end || s.end > question.text.size() ||
          !normalized_equal(question.text.substr(s.start, s.length()), sq.genuine_answer)) {
        throw AnchoringError("answer span of sub-question " + std::to_string(i + 1) +
                             " does not match '" + sq.genuine_answer + "'");
      }
      const bool clash = std::any_of(taken.begin(), taken.end(),
                                     [&](const Span& t) { return t.overlaps(s); });
      if (!clash) span = s;
    } else {
      span = locate_answer(question.text, sq.genuine_answer, taken);
    }
    if (!span) {
      if (policy == AnchorPolicy::Strict) {
        throw AnchoringError("sub-answer '" + sq.genuine_answer + "' (sub-question " +
                             std::to_string(i + 1) + ") cannot be located in question '" +
                             question.id + "'");
      }
      continue;
    }
    taken.push_back(*span);
    slots.push_back({*span, i, sq.label, question.text.substr(span->start, span->length())});
  }
  std::sort(slots.begin(), slots.end(),
            [](const TemplateSlot& a, const TemplateSlot& b) { return a.span.start < b.span.start; });

  QuestionTemplate tmpl;
  tmpl.original = question.text;
  std::size_t pos = 0;
  for (const auto& s : slots) {
    tmpl.literals.push_back(question.text.substr(pos, s.span.start - pos));
    pos = s.span.end;
  }
  tmpl.literals.push_back(question.text.substr(pos));
  tmpl.slots = std::move(slots);
  return tmpl;
}

std::string_view to_string(PlanMode mode) {
  return mode == PlanMode::ForceFake ? "force-fake" : "keep-genuine";
}

PlanMode parse_plan_mode(std::string_view name) {
  if (name == "force-fake") return PlanMode::ForceFake;
  if (name == "keep-genuine") return PlanMode::KeepGenuine;
  throw InvalidArgument("unknown combination mode '" + std::string(name) +
                        "' (expected force-fake or keep-genuine)");
}

CombinationPlan make_plan(const QuestionTemplate& tmpl,
                          std::span<const FabricatedAnswer> fabricated, std::size_t repeats,
                          PlanMode mode) {
  if (repeats == 0) throw InvalidArgument("combination repeats must be >= 1");
  CombinationPlan plan;
  plan.repeats = repeats;
  plan.mode = mode;
  const std::size_t n = tmpl.slot_count();
  plan.targets.resize(n);
  std::iota(plan.targets.begin(), plan.targets.end(), std::size_t{0});

  auto fab_of = [&](std::size_t s) -> const FabricatedAnswer& {
    const std::size_t i = tmpl.slots[s].sub_qa_index;
    if (i >= fabricated.size()) {
      throw InvalidArgument("no fabricated answers for sub-question " + std::to_string(i + 1));
    }
    return fabricated[i];
  };

  for (std::size_t s = 0; s < n; ++s) {
    auto ok = [&](std::string_view v) {
      if (normalized_contains(tmpl.original, v) && mode == PlanMode::ForceFake) return false;
      for (const auto& d : plan.designated) {
        if (conflicts(d, v)) return false;
      }
      return true;
    };
    if (mode == PlanMode::KeepGenuine) {
      if (!ok(tmpl.slots[s].genuine)) {
        throw InvalidArgument("genuine value '" + tmpl.slots[s].genuine +
                              "' overlaps another slot's value");
      }
      plan.designated.push_back(tmpl.slots[s].genuine);
      continue;
    }
    const auto& fab = fab_of(s);
    std::vector<std::size_t> order(fab.candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if ((a == fab.chosen) != (b == fab.chosen)) return a == fab.chosen;
      return fab.candidates[a].combined > fab.candidates[b].combined;
    });
    const std::string* pick = nullptr;
    for (std::size_t j : order) {
      if (ok(fab.candidates[j].text)) {
        pick = &fab.candidates[j].text;
        break;
      }
    }
    if (!pick) {
      throw InvalidArgument("every candidate for slot " + std::to_string(s) +
                            " overlaps the question or another slot's designated value");
    }
    plan.designated.push_back(*pick);
  }

  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::string> alts;
    for (const auto& c : fab_of(s).candidates) {
      bool clash = false;
      for (std::size_t o = 0; o < n && !clash; ++o) clash = conflicts(c.text, plan.designated[o]);
      clash = clash || normalized_equal(c.text, tmpl.slots[s].genuine);
      const bool dup = std::any_of(alts.begin(), alts.end(),
                                   [&](const std::string& a) { return normalized_equal(a, c.text); });
      if (!clash && !dup) alts.push_back(c.text);
    }
    plan.alternatives.push_back(std::move(alts));
  }
  return plan;
}

std::vector<SyntheticQuestion> local_combine(const QuestionTemplate& tmpl,
                                             const CombinationPlan& plan, std::uint64_t seed) {
  const std::size_t n = tmpl.slot_count();
  if (plan.designated.size() != n || plan.alternatives.size() != n) {
    throw InvalidArgument("combination plan covers " + std::to_string(plan.designated.size()) +
                          " slots but the template has " + std::to_string(n));
  }
  std::vector<SyntheticQuestion> out;
  out.reserve(plan.output_count());
  for (std::size_t t = 0; t < plan.targets.size(); ++t) {
    const std::size_t target = plan.targets[t];
    if (target >= n) throw InvalidArgument("plan target " + std::to_string(target) + " out of range");
    for (std::size_t r = 0; r < plan.repeats; ++r) {
      Rng rng(derive_seed(seed, t * plan.repeats + r));
      std::vector<std::string> values(n);
      for (std::size_t s = 0; s < n; ++s) {
        if (s == target) {
          values[s] = plan.designated[s];
          continue;
        }
        const auto& alts = plan.alternatives[s];
        if (alts.empty()) {
          throw InvalidArgument("slot " + std::to_string(s) + " ('" + tmpl.slots[s].genuine +
                                "') has no candidate values to draw from");
        }
        values[s] = alts[rng.below(alts.size())];
      }
      out.push_back({tmpl.render(values), target, std::move(values)});
    }
  }
  return out;
}

std::string_view to_string(CombinationVersion version) {
  return version == CombinationVersion::V1 ? "V1" : "V2";
}

CombinationVersion parse_combination_version(std::string_view name) {
  if (name == "V1" || name == "v1" || name == "1") return CombinationVersion::V1;
  if (name == "V2" || name == "v2" || name == "2") return CombinationVersion::V2;
  throw InvalidArgument("unknown combination prompt version '" + std::string(name) + "'");
}

std::string build_combination_prompt(CombinationVersion version, std::size_t repeats) {
  if (version == CombinationVersion::V1) {
    return assets::render(assets::text("prompts/combination_v1.txt"),
                          {{"repeats", std::to_string(repeats)}});
  }
  return assets::text("prompts/combination_v2.txt");
}

std::vector<ParsedCombination> parse_combination_reply(std::string_view reply) {
  std::vector<ParsedCombination> out;
  std::optional<std::size_t> current;
  std::istringstream in{std::string(reply)};
  for (std::string raw; std::getline(in, raw);) {
    std::string line = trim(raw);
    if (line.empty() || line == "......" || line == "...") continue;
    if (auto k = number_after(line, "for sub-question")) {
      current = *k;
      continue;
    }
    bool accepted = false;
    for (std::string_view label : {"ground truth question", "restored question"}) {
      if (number_after(line, label)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) break;
        line = trim(std::string_view(line).substr(colon + 1));
        if (line.empty() || line == "......") break;
        accepted = true;
        break;
      }
    }
    if (!accepted && (line.front() == '"' || line.rfind("\xE2\x80\x9C", 0) == 0)) accepted = true;
    if (!accepted) {
      std::size_t i = 0;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
        line = trim(std::string_view(line).substr(i + 1));
        accepted = !line.empty();
      }
    }
    if (!accepted && line.back() == '?') accepted = true;
    if (!accepted) continue;
    line = strip_quotes(line);
    if (!line.empty()) out.push_back({line, current});
  }
  if (out.empty()) throw CombinationParseError(std::string(reply));
  return out;
}

std::vector<SyntheticQuestion> llm_combine(Session& session, CombinationVersion version,
                                           const QuestionTemplate& tmpl,
                                           const CombinationPlan& plan,
                                           std::span<const SubQA> sub_qas) {
  std::string prompt = build_combination_prompt(version, plan.repeats);
  for (std::size_t s = 0; s < tmpl.slot_count(); ++s) {
    const auto& slot = tmpl.slots[s];
    prompt += "\n\nSub-question " + std::to_string(s + 1) + ": " +
              sub_qas[slot.sub_qa_index].sub_question + "\nIncorrect sub-answer: " +
              plan.designated[s] + "\nGenerated sub-answers: ";
    for (std::size_t j = 0; j < plan.alternatives[s].size(); ++j) {
      if (j) prompt += "; ";
      prompt += plan.alternatives[s][j];
    }
  }
  const auto parsed = parse_combination_reply(session.query(prompt));
  std::vector<SyntheticQuestion> out;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    SyntheticQuestion q;
    q.text = parsed[i].text;
    if (parsed[i].sub_question && *parsed[i].sub_question >= 1 &&
        *parsed[i].sub_question <= tmpl.slot_count()) {
      q.target_slot = *parsed[i].sub_question - 1;
    } else if (i / plan.repeats < plan.targets.size()) {
      q.target_slot = plan.targets[i / plan.repeats];
    }
    if (auto values = tmpl.match(q.text)) q.values = std::move(*values);
    out.push_back(std::move(q));
  }
  return out;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::MissingTargetValue: return "missing-target-value";
    case ViolationKind::LeakedTargetValue: return "leaked-target-value";
    case ViolationKind::StructureMismatch: return "structure-mismatch";
  }
  return "structure-mismatch";
}

ComplianceReport validate_combination(std::span<const SyntheticQuestion> outputs,
                                      const CombinationPlan& plan, const QuestionTemplate& tmpl) {
  ComplianceReport report;
  report.total = outputs.size();
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& out = outputs[i];
    const std::size_t before = report.violations.size();
    if (!out.target_slot || *out.target_slot >= plan.designated.size()) {
      report.violations.push_back({i, ViolationKind::MissingTargetValue, "output has no target slot"});
    } else {
      const std::size_t target = *out.target_slot;
      if (!normalized_contains(out.text, plan.designated[target])) {
        report.violations.push_back({i, ViolationKind::MissingTargetValue,
                                     "'" + plan.designated[target] + "' is absent"});
      }
      for (std::size_t other : plan.targets) {
        if (other == target || other >= plan.designated.size()) continue;
        if (normalized_contains(out.text, plan.designated[other])) {
          report.violations.push_back({i, ViolationKind::LeakedTargetValue,
                                       "'" + plan.designated[other] + "' belongs to slot " +
                                           std::to_string(other)});
        }
      }
    }
    if (!tmpl.match(out.text)) {
      report.violations.push_back(
          {i, ViolationKind::StructureMismatch, "text does not follow the question template"});
    }
    if (report.violations.size() == before) ++report.compliant;
  }
  return report;
}

}  // namespace p2f
