#include <algorithm>
#include <array>
#include <future>
#include <utility>

#include "p2f/dataset.hpp"
#include "p2f/evaluation.hpp"
#include "p2f/random.hpp"

namespace p2f {
namespace {

constexpr std::array<std::string_view, 9> kSchemeLabels = {
    "standard", "di-v1",     "di-v2",         "di-v3",        "di-v4",
    "p2f-llm",  "p2f-local", "p2f-local-gen", "p2f-local-all"};

template <class F>
auto in_stage(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const BackendError& e) {
    throw StageError(std::string(name), e.what(), true);
  } catch (const Error& e) {
    throw StageError(std::string(name), e.what(), false);
  }
}

std::string clean_answer(std::string_view reply) {
  std::string a = trim(reply);
  if (a.size() >= 2 && (a.front() == '"' || a.front() == '\'') && a.back() == a.front()) {
    a = trim(std::string_view(a).substr(1, a.size() - 2));
  }
  while (!a.empty() && a.back() == '.') a.pop_back();
  return trim(a);
}

bool wants(const PipelineOptions& o, AttackType t) {
  return std::find(o.attack_types.begin(), o.attack_types.end(), t) != o.attack_types.end();
}

// Asks each sub-question in `session` and fills genuine_answer.
void answer_all(Session& session, std::vector<SubQA>& sub_qas) {
  for (auto& sq : sub_qas) sq.genuine_answer = clean_answer(session.query(sq.sub_question));
}

void label_from_gold(const QuestionRecord& q, std::vector<SubQA>& sub_qas) {
  const auto gold = q.gold_texts();
  for (auto& sq : sub_qas) {
    if (!sq.label.empty()) continue;
    std::optional<std::size_t> hit;
    std::size_t hits = 0;
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (gold_coverage(sq.genuine_answer, gold[g]) >= 0.5) {
        hit = g;
        ++hits;
      }
    }
    if (hits == 1) sq.label = q.gold_elements[*hit].label;
  }
}

}  // namespace

std::string_view to_string(EngineKind kind) { return kind == EngineKind::Local ? "local" : "llm"; }

EngineKind parse_engine_kind(std::string_view name) {
  if (name == "local") return EngineKind::Local;
  if (name == "llm") return EngineKind::Llm;
  throw InvalidArgument("unknown engine '" + std::string(name) + "' (expected llm or local)");
}

std::span<const std::string_view> scheme_labels() { return kSchemeLabels; }

SchemeSpec parse_scheme(std::string_view label) {
  SchemeSpec s;
  s.label = std::string(label);
  if (label == "standard") {
    s.kind = SchemeKind::Standard;
    s.directive = DirectiveScheme::DI_V1;
    s.fabrication = s.combination = EngineKind::Local;
  } else if (label.substr(0, 3) == "di-") {
    s.kind = SchemeKind::DirectInstruction;
    s.directive = parse_directive_scheme(label);
    if (is_p2f(s.directive)) throw InvalidArgument("unknown scheme '" + s.label + "'");
    s.fabrication = s.combination = EngineKind::Local;
  } else if (label == "p2f-llm") {
    s.fabrication = s.combination = EngineKind::Llm;
  } else if (label == "p2f-local") {
    s.fabrication = EngineKind::Llm;
    s.combination = EngineKind::Local;
  } else if (label == "p2f-local-gen") {
    s.fabrication = EngineKind::Local;
    s.combination = EngineKind::Llm;
  } else if (label == "p2f-local-all") {
    s.fabrication = s.combination = EngineKind::Local;
  } else {
    std::string valid;
    for (auto l : kSchemeLabels) valid += (valid.empty() ? "" : ", ") + std::string(l);
    throw InvalidArgument("unknown scheme '" + s.label + "' (valid: " + valid + ")");
  }
  return s;
}

void PipelineOptions::validate() const {
  if (m == 0) throw InvalidArgument("m must be >= 1");
  if (repeats == 0) throw InvalidArgument("repeats must be >= 1");
  if (attack_types.empty()) throw InvalidArgument("at least one attack type is required");
  consistency.validate();
  // Fails early instead of after the decomposition queries were spent.
  if (scheme.directive == DirectiveScheme::P2F_V3) build_directive(scheme.directive);
  if (scheme.kind == SchemeKind::P2F && !is_p2f(scheme.directive)) {
    throw InvalidArgument("P2F schemes need a P2F directive");
  }
  if (scheme.kind == SchemeKind::DirectInstruction && is_p2f(scheme.directive)) {
    throw InvalidArgument("DI schemes need a DI directive");
  }
}

StageError::StageError(std::string stage, const std::string& message, bool backend_failure)
    : Error(stage + ": " + message), stage_(std::move(stage)), backend_failure_(backend_failure) {}

std::size_t PipelineTrace::queries(std::string_view stage) const {
  std::size_t n = 0;
  for (const auto& s : stages) {
    if (s.stage == stage) n += s.queries;
  }
  return n;
}

std::size_t PipelineTrace::query_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) {
    if (s.stage != "utility" && s.stage != "attack") n += s.queries;
  }
  return n;
}

namespace {

// Runs f as stage `name`, recording the queries `s` spent on it.
template <class F>
auto counted(PipelineTrace& trace, std::string_view name, Session& s, F&& f) -> decltype(f()) {
  struct Record {
    PipelineTrace& trace;
    std::string_view name;
    Session& s;
    std::size_t before;
    ~Record() { trace.stages.push_back({std::string(name), s.query_count() - before}); }
  } record{trace, name, s, s.query_count()};
  return in_stage(name, f);
}

void require_p2f(const PipelineOptions& options, std::string_view stage) {
  if (options.scheme.kind != SchemeKind::P2F) {
    throw StageError(std::string(stage), "scheme " + options.scheme.label + " has no " +
                                             std::string(stage) + " stage", false);
  }
}

}  // namespace

PipelineState::PipelineState(QuestionRecord q, std::shared_ptr<ChatBackend> backend)
    : question(std::move(q)), main(std::move(backend)) {}

void stage_decompose(PipelineState& st, const PipelineOptions& options) {
  in_stage("config", [&] {
    options.validate();
    if (!st.main.backend()) throw InvalidArgument("no backend configured");
  });
  const bool p2f = options.scheme.kind == SchemeKind::P2F;
  const std::uint64_t seed = options.seed;
  auto& trace = st.trace;
  auto& main = st.main;
  auto& sub_qas = st.sub_qas;
  const auto& question = st.question;

  counted(trace, "utility", main, [&] { main.query(question.text); });

  // Standard and DI keep the decomposition out of the conversation being
  // attacked.
  Session evaluator = p2f ? Session(main.backend()) : main.fork();
  Session& work = p2f ? main : evaluator;

  sub_qas = counted(trace, "decomposition", work, [&] {
    auto r = parse_subquestions(work.query(build_decomposition_prompt(options.decomposition).rendered));
    return std::move(r.sub_qas);
  });
  counted(trace, "sub-answers", work, [&] { answer_all(work, sub_qas); });

  if (options.refine && !question.gold_elements.empty()) {
    counted(trace, "refinement", work, [&] {
      std::vector<std::string> answers;
      for (const auto& sq : sub_qas) answers.push_back(sq.genuine_answer);
      const auto gold = question.gold_texts();
      const auto flagged = needs_refinement(answers, gold);
      std::vector<SubQA> refined;
      for (std::size_t i = 0; i < sub_qas.size(); ++i) {
        if (std::find(flagged.begin(), flagged.end(), i) == flagged.end()) {
          refined.push_back(sub_qas[i]);
          continue;
        }
        auto parts = parse_subquestions(work.query(build_refinement_prompt(sub_qas[i].sub_question)));
        answer_all(work, parts.sub_qas);
        for (auto& p : parts.sub_qas) refined.push_back(std::move(p));
      }
      sub_qas = std::move(refined);
    });
  }
  label_from_gold(question, sub_qas);

  st.tmpl = in_stage("template", [&] {
    return build_template(question, sub_qas, AnchorPolicy::SkipUnanchored);
  });

  // The attack set depends only on the question and its decomposition, so
  // every scheme faces the same queries.
  auto& queries = st.queries;
  queries.clear();
  if (wants(options, AttackType::FactCheck)) {
    if (options.llm_attack_generation) {
      Session gen = main.fork();
      queries = counted(trace, "attack-generation", gen,
                        [&] { return generate_llm_fact_checks(gen, sub_qas); });
    } else {
      queries = in_stage("attack-generation",
                         [&] { return generate_fact_check(sub_qas, &st.tmpl, seed); });
    }
  }
  in_stage("attack-generation", [&] {
    const auto attack_pool = options.pool.excluding(question.gold_texts());
    std::vector<std::vector<std::string>> fakes;
    for (std::size_t i = 0; i < sub_qas.size(); ++i) {
      try {
        fakes.push_back(local_fabricate(sub_qas[i], 3, attack_pool, derive_seed(seed, 1000 + i)));
      } catch (const PoolExhausted&) {
        fakes.emplace_back();
      }
    }
    for (AttackType type : circumventive_types()) {
      if (!wants(options, type)) continue;
      const AttackType one[] = {type};
      try {
        auto more = generate_circumventive(st.tmpl, sub_qas, one, fakes, seed);
        queries.insert(queries.end(), more.begin(), more.end());
      } catch (const InvalidArgument&) {
        // False-claim variants need a fabricated value for every target.
        trace.stages.push_back({"skipped:" + std::string(to_string(type)), 0});
      }
    }
    if (wants(options, AttackType::TextCompletion) &&
        st.tmpl.slot_count() > options.text_completion_hints) {
      queries.push_back(generate_text_completion(st.tmpl, options.text_completion_hints, seed));
    }
    if (wants(options, AttackType::RevertAttack) && !sub_qas.empty()) {
      queries.push_back(generate_revert(sub_qas));
    }
    if (queries.empty()) throw InvalidArgument("no attack queries could be generated");
  });
}

void stage_fabricate(PipelineState& st, const PipelineOptions& options) {
  require_p2f(options, "fabrication");
  st.fabricated = counted(st.trace, "fabrication", st.main, [&] {
    if (st.sub_qas.empty()) throw InvalidArgument("nothing to fabricate: no sub-questions");
    if (options.scheme.fabrication == EngineKind::Local) {
      std::vector<std::string> avoid = st.question.gold_texts();
      for (const auto& sq : st.sub_qas) avoid.push_back(sq.genuine_answer);
      LocalFabricationEngine engine(options.pool.excluding(avoid),
                                    derive_seed(options.seed, "fabrication"));
      return fabricate_and_select(st.sub_qas, options.m, engine, options.consistency);
    }
    LlmFabricationEngine engine(st.main, options.fabrication_version);
    return fabricate_and_select(st.sub_qas, options.m, engine, options.consistency);
  });
}

void stage_combine(PipelineState& st, const PipelineOptions& options) {
  require_p2f(options, "combination");
  st.synthetic = counted(st.trace, "combination", st.main, [&] {
    if (st.fabricated.size() != st.sub_qas.size()) {
      throw InvalidArgument("combination needs one fabricated answer per sub-question");
    }
    if (st.tmpl.slot_count() == 0) {
      throw AnchoringError("no sub-answer could be located in the question");
    }
    const auto plan = make_plan(st.tmpl, st.fabricated, options.repeats, options.plan_mode);
    if (options.scheme.combination == EngineKind::Local) {
      return local_combine(st.tmpl, plan, derive_seed(options.seed, "combination"));
    }
    return llm_combine(st.main, options.combination_version, st.tmpl, plan, st.sub_qas);
  });
}

void stage_obfuscate(PipelineState& st, const PipelineOptions& options) {
  if (options.scheme.kind == SchemeKind::Standard) return;
  ObfuscationSession obs(st.question, std::move(st.main), options.scheme.directive);
  obs.sub_qas = st.sub_qas;
  if (options.scheme.kind == SchemeKind::P2F) {
    for (const auto& f : st.fabricated) obs.synthetics.push_back(f.text());
    for (const auto& s : st.synthetic) obs.combined.push_back(s.text);
    obs.combined_in_transcript = options.scheme.combination == EngineKind::Llm;
  }
  try {
    counted(st.trace, "obfuscation", obs.session, [&] { apply_obfuscation(obs); });
  } catch (...) {
    st.main = std::move(obs.session);
    throw;
  }
  st.main = std::move(obs.session);
  st.acknowledgment = obs.acknowledgment;
  st.obfuscated = true;
}

void stage_attack(PipelineState& st, const PipelineOptions&) {
  st.attacks = counted(st.trace, "attack", st.main, [&] {
    if (st.queries.empty()) throw InvalidArgument("no attack queries; run decomposition first");
    SessionTarget target(st.main);
    return run_attacks(st.queries, st.sub_qas, target);
  });
}

ForgetfulnessReport stage_score(const PipelineState& st, const PipelineOptions& options) {
  auto report = in_stage("scoring", [&] {
    return score_attacks(options.scheme.label, st.question.id, st.attacks);
  });
  report.query_count = st.trace.query_count();
  report.attack_query_count = st.trace.queries("attack");
  return report;
}

PipelineResult run_pipeline(const QuestionRecord& question, const PipelineOptions& options,
                            std::shared_ptr<ChatBackend> backend) {
  PipelineState st(question, std::move(backend));
  stage_decompose(st, options);
  if (options.scheme.kind == SchemeKind::P2F) {
    stage_fabricate(st, options);
    stage_combine(st, options);
  }
  stage_obfuscate(st, options);
  stage_attack(st, options);
  auto report = stage_score(st, options);
  return PipelineResult{std::move(st), std::move(report)};
}

CorpusRun run_corpus(std::span<const QuestionRecord> corpus, const PipelineOptions& options,
                     const BackendFactory& backend_for, std::size_t jobs) {
  if (jobs == 0) throw InvalidArgument("jobs must be >= 1");
  std::vector<std::optional<PipelineResult>> slots(corpus.size());
  auto run_one = [&](std::size_t i) {
    PipelineOptions o = options;
    o.seed = derive_seed(options.seed, corpus[i].id);
    slots[i].emplace(run_pipeline(corpus[i], o, backend_for(corpus[i])));
  };
  for (std::size_t start = 0; start < corpus.size(); start += jobs) {
    const std::size_t end = std::min(corpus.size(), start + jobs);
    if (end - start == 1) {
      run_one(start);
      continue;
    }
    std::vector<std::future<void>> pending;
    for (std::size_t i = start; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, run_one, i));
    }
    for (auto& f : pending) f.get();
  }
  CorpusRun run;
  std::vector<ForgetfulnessReport> parts;
  for (auto& s : slots) {
    parts.push_back(s->report);
    run.results.push_back(std::move(*s));
  }
  run.report = merge_reports(options.scheme.label, parts);
  return run;
}

}  // namespace p2f
