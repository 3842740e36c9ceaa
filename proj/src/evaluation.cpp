#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "p2f/dataset.hpp"
#include "p2f/evaluation.hpp"
#include "p2f/memory_sim.hpp"
#include "p2f/random.hpp"

namespace p2f {
namespace {

struct Sums {
  std::size_t n = 0;
  double jaccard = 0.0;
  double cosine = 0.0;
  double exact = 0.0;
};

void finish_aggregates(ForgetfulnessReport& r) {
  r.jaccard_ff = r.cosine_ff = r.exact_ff = 0.0;
  if (r.questions.empty()) return;
  for (const auto& q : r.questions) {
    r.jaccard_ff += q.jaccard_ff;
    r.cosine_ff += q.cosine_ff;
    r.exact_ff += q.exact_ff;
  }
  const double n = static_cast<double>(r.questions.size());
  r.jaccard_ff /= n;
  r.cosine_ff /= n;
  r.exact_ff /= n;
}

struct Estimator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  Estimate get() const {
    if (n == 0) return {};
    const double mean = sum / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    const double var =
        std::max(0.0, (sum_sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1));
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }
};

std::string fmt2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

// Everything the simulator harnesses need about one question.
struct SimQuestion {
  const QuestionRecord* record = nullptr;
  std::vector<SubQA> sub_qas;
  QuestionTemplate tmpl;
  // fakes[sub_qa][k]
  std::vector<std::vector<std::string>> fakes;
};

SimQuestion prepare(const QuestionRecord& record, const ReplacementPool& pool, std::size_t count,
                    std::uint64_t seed) {
  SimQuestion q;
  q.record = &record;
  q.sub_qas = sub_qas_from_gold(record);
  q.tmpl = build_template(record, q.sub_qas, AnchorPolicy::Strict);
  const auto usable = pool.excluding(record.gold_texts());
  for (std::size_t i = 0; i < q.sub_qas.size(); ++i) {
    q.fakes.push_back(count == 0 ? std::vector<std::string>{}
                                 : local_fabricate(q.sub_qas[i], count, usable,
                                                   derive_seed(derive_seed(seed, record.id), i)));
  }
  return q;
}

MemoryStatement genuine_statement(const SimQuestion& q, bool denied) {
  std::vector<std::string> values(q.sub_qas.size());
  for (std::size_t i = 0; i < q.sub_qas.size(); ++i) values[i] = q.sub_qas[i].genuine_answer;
  return MemoryStatement::make(q.record->text, Origin::Genuine, denied, false, std::move(values));
}

// Combined synthetic k: every slot takes fakes[.][k], or keeps the genuine
// value where `fake_slot` says no.
template <class Pred>
MemoryStatement combined_statement(const SimQuestion& q, std::size_t k, Pred fake_slot) {
  std::vector<std::string> values(q.sub_qas.size());
  std::vector<std::string> rendered;
  for (std::size_t i = 0; i < q.sub_qas.size(); ++i) {
    values[i] = fake_slot(i) ? q.fakes[i][k] : q.sub_qas[i].genuine_answer;
  }
  for (const auto& slot : q.tmpl.slots) rendered.push_back(values[slot.sub_qa_index]);
  return MemoryStatement::make(q.tmpl.render(rendered), Origin::Synthetic, false, true,
                               std::move(values));
}

std::vector<MemoryStatement> ablation_statements(const SimQuestion& q, AblationConfig config,
                                                 const AblationOptions& o) {
  std::vector<MemoryStatement> out;
  out.push_back(genuine_statement(q, config != AblationConfig::Standard));
  switch (config) {
    case AblationConfig::Standard:
    case AblationConfig::NoDecompNoFabric:
      break;
    case AblationConfig::Full:
      for (std::size_t k = 0; k < o.r; ++k) {
        out.push_back(combined_statement(q, k, [](std::size_t) { return true; }));
      }
      break;
    case AblationConfig::NoDecomposition:
      // Without sub-answers only the obvious entities get swapped.
      for (std::size_t k = 0; k < o.r; ++k) {
        out.push_back(combined_statement(q, k, [&](std::size_t i) {
          const auto& label = q.sub_qas[i].label;
          return label == "ORG" || label == "PERSON" || label == "NUM" || label == "DATE";
        }));
      }
      break;
    case AblationConfig::NoCombination:
      for (std::size_t i = 0; i < q.sub_qas.size(); ++i) {
        for (std::size_t k = 0; k < o.r; ++k) {
          std::vector<std::string> values(q.sub_qas.size());
          values[i] = q.fakes[i][k];
          out.push_back(MemoryStatement::make(q.sub_qas[i].sub_question + " " + q.fakes[i][k],
                                              Origin::Synthetic, false, true, std::move(values),
                                              o.no_combination_weight));
        }
      }
      break;
  }
  return out;
}

std::vector<AttackQuery> slot_queries(const SimQuestion& q) {
  std::vector<AttackQuery> out;
  for (std::size_t s = 0; s < q.tmpl.slot_count(); ++s) {
    auto values = q.tmpl.genuine_values();
    values[s] = "___";
    AttackQuery a;
    a.type = AttackType::TextCompletion;
    a.text = q.tmpl.render(values);
    a.target_sub_qa = q.tmpl.slots[s].sub_qa_index;
    a.targets = {a.target_sub_qa};
    a.hints = q.tmpl.slot_count() - 1;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

ForgetfulnessReport score_attacks(std::string scheme, std::string question_id,
                                  std::span<const AttackResult> results) {
  ForgetfulnessReport r;
  r.scheme = std::move(scheme);
  QuestionScore q;
  q.id = std::move(question_id);
  std::map<AttackType, Sums> types;
  Sums all;
  for (const auto& a : results) {
    if (!a.ok()) {
      ++q.errors;
      continue;
    }
    const double j = 1.0 - similarity(a.genuine, a.answer, SimilarityKind::Jaccard);
    const double c = 1.0 - similarity(a.genuine, a.answer, SimilarityKind::Cosine);
    const double e = normalized_equal(a.genuine, a.answer) ? 0.0 : 1.0;
    for (Sums* s : {&types[a.query.type], &all}) {
      ++s->n;
      s->jaccard += j;
      s->cosine += c;
      s->exact += e;
    }
  }
  if (all.n == 0) {
    throw MetricError("question '" + q.id + "' has no successful attack to score");
  }
  const double n = static_cast<double>(all.n);
  q.attacks = all.n;
  q.jaccard_ff = all.jaccard / n;
  q.cosine_ff = all.cosine / n;
  q.exact_ff = all.exact / n;
  r.questions.push_back(q);
  for (const auto& [type, s] : types) {
    const double m = static_cast<double>(s.n);
    r.by_type.push_back({type, s.n, s.jaccard / m, s.cosine / m, s.exact / m});
  }
  finish_aggregates(r);
  return r;
}

ForgetfulnessReport merge_reports(std::string scheme, std::span<const ForgetfulnessReport> parts) {
  ForgetfulnessReport r;
  r.scheme = std::move(scheme);
  std::map<AttackType, Sums> types;
  for (const auto& p : parts) {
    r.questions.insert(r.questions.end(), p.questions.begin(), p.questions.end());
    r.query_count += p.query_count;
    r.attack_query_count += p.attack_query_count;
    for (const auto& t : p.by_type) {
      auto& s = types[t.type];
      const double w = static_cast<double>(t.attacks);
      s.n += t.attacks;
      s.jaccard += t.jaccard_ff * w;
      s.cosine += t.cosine_ff * w;
      s.exact += t.exact_ff * w;
    }
  }
  for (const auto& [type, s] : types) {
    const double m = static_cast<double>(s.n);
    r.by_type.push_back({type, s.n, s.jaccard / m, s.cosine / m, s.exact / m});
  }
  finish_aggregates(r);
  return r;
}

std::string_view to_string(AblationConfig config) {
  switch (config) {
    case AblationConfig::Full: return "full";
    case AblationConfig::NoDecomposition: return "no-decomposition";
    case AblationConfig::NoCombination: return "no-combination";
    case AblationConfig::NoDecompNoFabric: return "di";
    case AblationConfig::Standard: return "standard";
  }
  return "?";
}

AblationConfig parse_ablation_config(std::string_view name) {
  for (auto c : {AblationConfig::Full, AblationConfig::NoDecomposition,
                 AblationConfig::NoCombination, AblationConfig::NoDecompNoFabric,
                 AblationConfig::Standard}) {
    if (to_string(c) == name) return c;
  }
  if (name == "no-decomp-no-fabric") return AblationConfig::NoDecompNoFabric;
  throw InvalidArgument("unknown ablation config '" + std::string(name) +
                        "' (expected full, no-decomposition, no-combination, di, standard)");
}

AblationResult run_ablation(std::span<const QuestionRecord> corpus,
                            std::span<const AblationConfig> configs,
                            const AblationOptions& options) {
  if (configs.empty()) throw InvalidArgument("run_ablation: no configs given");
  if (corpus.empty()) throw InvalidArgument("run_ablation: empty corpus");
  if (options.trials == 0) throw InvalidArgument("run_ablation: trials must be >= 1");

  std::vector<SimQuestion> questions;
  for (const auto& rec : corpus) questions.push_back(prepare(rec, options.pool, options.r, options.seed));

  AblationResult result;
  result.configs.assign(configs.begin(), configs.end());
  for (AblationConfig config : configs) {
    std::vector<ForgetfulnessReport> parts;
    for (const auto& q : questions) {
      MemorySimulator sim;
      const auto statements = ablation_statements(q, config, options);
      sim.ingest(statements);
      SimulatorParams params;
      params.leak_rate = options.leak_rate;
      params.rng_seed = derive_seed(options.seed, q.record->id);
      SimulatorTarget target(sim, params);
      const auto base = slot_queries(q);
      std::vector<AttackQuery> queries;
      for (std::size_t t = 0; t < options.trials; ++t) queries.insert(queries.end(), base.begin(), base.end());
      const auto results = run_attacks(queries, q.sub_qas, target);
      parts.push_back(score_attacks(std::string(to_string(config)), q.record->id, results));
    }
    result.reports.push_back(merge_reports(std::string(to_string(config)), parts));
  }

  std::vector<std::size_t> order(configs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.reports[a].jaccard_ff > result.reports[b].jaccard_ff;
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& rep = result.reports[order[i]];
    if (i > 0) {
      result.ordering += rep.jaccard_ff == result.reports[order[i - 1]].jaccard_ff ? " = " : " > ";
    }
    result.ordering += rep.scheme + " (" + fmt2(rep.jaccard_ff) + ")";
  }
  return result;
}

void SweepConfig::validate() const {
  if (trials == 0) throw InvalidArgument("sweep trials must be >= 1");
  if (ratios.empty() || hints.empty()) throw InvalidArgument("sweep needs ratios and hints");
  if (!(leak_rate >= 0.0 && leak_rate <= 1.0)) throw InvalidArgument("lambda must be in [0, 1]");
}

const SweepCell& SweepResult::at(std::size_t r, std::size_t hints) const {
  for (const auto& c : cells) {
    if (c.r == r && c.hints == hints) return c;
  }
  throw InvalidArgument("no sweep cell for r=" + std::to_string(r) +
                        ", hints=" + std::to_string(hints));
}

SweepResult run_ratio_sweep(const SweepConfig& config) {
  config.validate();
  const QuestionRecord record = config.question ? *config.question : legal_case_fixture();
  const std::size_t max_r = *std::max_element(config.ratios.begin(), config.ratios.end());
  const SimQuestion q = prepare(record, config.pool, max_r, config.seed);
  for (std::size_t h : config.hints) {
    if (h + 1 > q.tmpl.slot_count()) {
      throw InvalidArgument("hints=" + std::to_string(h) + " leaves no blank in a question with " +
                            std::to_string(q.tmpl.slot_count()) + " slots");
    }
  }

  auto run_cell = [&](const MemorySimulator& sim, std::size_t r, std::size_t h, bool hinted) {
    SimulatorParams params;
    params.leak_rate = config.leak_rate;
    params.hinted = hinted;
    params.hints = h;
    Estimator exact, jac, cos;
    for (std::size_t t = 0; t < config.trials; ++t) {
      const AttackQuery query = generate_text_completion(q.tmpl, h, derive_seed(config.seed, t));
      std::vector<std::string> genuine_parts;
      for (std::size_t i : query.targets) genuine_parts.push_back(q.sub_qas[i].genuine_answer);
      const std::string genuine = join(genuine_parts, " ");
      // Same two uniforms for trial t in every cell.
      Rng rng(derive_seed(derive_seed(config.seed, "sweep"), t));
      const MemoryStatement* s = sim.recall(query.text, params, rng, query.targets);
      std::string answer(MemorySimulator::kRefusal);
      if (s) {
        std::vector<std::string> parts;
        for (std::size_t i : query.targets) parts.push_back(s->slot_values[i]);
        answer = join(parts, " ");
      }
      exact.add(normalized_equal(genuine, answer) ? 0.0 : 1.0);
      jac.add(1.0 - similarity(genuine, answer, SimilarityKind::Jaccard));
      cos.add(1.0 - similarity(genuine, answer, SimilarityKind::Cosine));
    }
    return SweepCell{r, h, exact.get(), jac.get(), cos.get()};
  };

  SweepResult result;
  result.config = config;
  for (std::size_t h : config.hints) {
    MemorySimulator undefended;
    const MemoryStatement g = genuine_statement(q, false);
    undefended.ingest(std::span<const MemoryStatement>(&g, 1));
    result.baseline.push_back(run_cell(undefended, 0, h, true));
    for (std::size_t r : config.ratios) {
      MemorySimulator sim;
      std::vector<MemoryStatement> statements{genuine_statement(q, true)};
      for (std::size_t k = 0; k < r; ++k) {
        statements.push_back(combined_statement(q, k, [](std::size_t) { return true; }));
      }
      sim.ingest(statements);
      result.cells.push_back(run_cell(sim, r, h, true));
    }
  }
  return result;
}

}  // namespace p2f
