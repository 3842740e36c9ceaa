#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "p2f/attacks.hpp"
#include "p2f/backend.hpp"
#include "p2f/combination.hpp"
#include "p2f/core.hpp"
#include "p2f/decomposition.hpp"
#include "p2f/fabrication.hpp"
#include "p2f/metrics.hpp"
#include "p2f/obfuscation.hpp"

namespace p2f {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct QuestionScore {
  std::string id;
  double jaccard_ff = 0.0;
  double cosine_ff = 0.0;
  /// Share of attacks whose answer does not normalize equal to the genuine one.
  double exact_ff = 0.0;
  std::size_t attacks = 0;
  std::size_t errors = 0;
};

struct TypeScore {
  AttackType type = AttackType::FactCheck;
  std::size_t attacks = 0;
  double jaccard_ff = 0.0;
  double cosine_ff = 0.0;
  double exact_ff = 0.0;
};

struct ForgetfulnessReport {
  std::string scheme;
  std::vector<QuestionScore> questions;
  /// Pooled over every scored attack, in AttackType order.
  std::vector<TypeScore> by_type;
  /// Means of the per-question scores.
  double jaccard_ff = 0.0;
  double cosine_ff = 0.0;
  double exact_ff = 0.0;
  /// Backend queries spent building the defense.
  std::size_t query_count = 0;
  /// Backend queries spent on attack execution.
  std::size_t attack_query_count = 0;
};

/// Scores one question's attack results. Errored attacks are left out; when
/// every attack errored the question cannot be scored and MetricError is
/// thrown.
ForgetfulnessReport score_attacks(std::string scheme, std::string question_id,
                                  std::span<const AttackResult> results);

/// Concatenates per-question reports and recomputes the aggregates. Query
/// counts are summed.
ForgetfulnessReport merge_reports(std::string scheme, std::span<const ForgetfulnessReport> parts);

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

enum class SchemeKind { Standard, DirectInstruction, P2F };
enum class EngineKind { Local, Llm };

std::string_view to_string(EngineKind kind);
EngineKind parse_engine_kind(std::string_view name);

struct SchemeSpec {
  std::string label = "p2f-local";
  SchemeKind kind = SchemeKind::P2F;
  DirectiveScheme directive = DirectiveScheme::P2F_V1;
  EngineKind fabrication = EngineKind::Llm;
  EngineKind combination = EngineKind::Local;
};

/// standard, di-v1 .. di-v4, p2f-llm (LLM fabrication and combination),
/// p2f-local (LLM fabrication, local combination), p2f-local-gen (local
/// fabrication, LLM combination), p2f-local-all (both local).
SchemeSpec parse_scheme(std::string_view label);
std::span<const std::string_view> scheme_labels();

struct PipelineOptions {
  SchemeSpec scheme;
  DecompositionVersion decomposition = DecompositionVersion::V2;
  FabricationVersion fabrication_version = FabricationVersion::V1;
  CombinationVersion combination_version = CombinationVersion::V2;
  std::size_t m = 5;
  std::size_t repeats = 3;
  PlanMode plan_mode = PlanMode::ForceFake;
  std::uint64_t seed = 0;
  ConsistencyParams consistency;
  /// Re-decompose sub-answers that cover several gold elements (one level).
  bool refine = true;
  std::vector<AttackType> attack_types{all_attack_types().begin(), all_attack_types().end()};
  std::size_t text_completion_hints = 0;
  /// Ask a fork of the session for fact-check questions instead of building
  /// them from the template.
  bool llm_attack_generation = true;
  ReplacementPool pool = ReplacementPool::builtin();

  void validate() const;
};

/// A stage failed. backend_failure is set when the cause was a BackendError.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message, bool backend_failure);
  const std::string& stage() const { return stage_; }
  bool backend_failure() const { return backend_failure_; }

 private:
  std::string stage_;
  bool backend_failure_;
};

struct StageCount {
  std::string stage;
  std::size_t queries = 0;
};

struct PipelineTrace {
  std::vector<StageCount> stages;

  std::size_t queries(std::string_view stage) const;
  /// Every stage except "utility" and "attack".
  std::size_t query_count() const;
};

/// Everything a run accumulates. Stages fill it in order; each can run on
/// a state restored from disk.
struct PipelineState {
  PipelineState(QuestionRecord question, std::shared_ptr<ChatBackend> backend);

  QuestionRecord question;
  /// The conversation under attack.
  Session main;
  std::vector<SubQA> sub_qas;
  QuestionTemplate tmpl;
  std::vector<AttackQuery> queries;
  std::vector<FabricatedAnswer> fabricated;
  std::vector<SyntheticQuestion> synthetic;
  bool obfuscated = false;
  std::string acknowledgment;
  std::vector<AttackResult> attacks;
  PipelineTrace trace;
};

/// Utility turn, decomposition and sub-answers, refinement, template and
/// attack generation.
void stage_decompose(PipelineState& state, const PipelineOptions& options);
/// P2F only.
void stage_fabricate(PipelineState& state, const PipelineOptions& options);
/// P2F only; needs stage_fabricate.
void stage_combine(PipelineState& state, const PipelineOptions& options);
/// Sends the directive. A no-op for the standard scheme.
void stage_obfuscate(PipelineState& state, const PipelineOptions& options);
void stage_attack(PipelineState& state, const PipelineOptions& options);
ForgetfulnessReport stage_score(const PipelineState& state, const PipelineOptions& options);

struct PipelineResult {
  PipelineState state;
  ForgetfulnessReport report;
};

/// Runs one question through every stage in order:
///  utility turn, decomposition, sub-answers, refinement, attack generation,
///  fabrication, combination, obfuscation, attacks, scoring.
/// Standard and DI schemes decompose in a fork so the main transcript only
/// holds the question (and the DI directive). Throws StageError.
PipelineResult run_pipeline(const QuestionRecord& question, const PipelineOptions& options,
                            std::shared_ptr<ChatBackend> backend);

using BackendFactory = std::function<std::shared_ptr<ChatBackend>(const QuestionRecord&)>;

struct CorpusRun {
  std::vector<PipelineResult> results;
  ForgetfulnessReport report;
};

/// Runs every question, at most `jobs` at a time. Question i uses seed
/// derive_seed(options.seed, id). Results keep corpus order.
CorpusRun run_corpus(std::span<const QuestionRecord> corpus, const PipelineOptions& options,
                     const BackendFactory& backend_for, std::size_t jobs = 1);

// ---------------------------------------------------------------------------
// Simulator harnesses
// ---------------------------------------------------------------------------

enum class AblationConfig { Full, NoDecomposition, NoCombination, NoDecompNoFabric, Standard };

std::string_view to_string(AblationConfig config);
AblationConfig parse_ablation_config(std::string_view name);

struct AblationOptions {
  double leak_rate = 0.5;
  std::size_t r = 7;
  /// Match and draw weight of the per-slot statements in NoCombination.
  double no_combination_weight = 0.8;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  ReplacementPool pool = ReplacementPool::builtin();
};

struct AblationResult {
  std::vector<AblationConfig> configs;
  std::vector<ForgetfulnessReport> reports;
  /// Configs by descending Jaccard FF, e.g. "full (0.94) > di (0.50)".
  std::string ordering;
};

/// Every config sees the same questions, queries and random draws. Each
/// anchored slot of a question is attacked with the question text blanked at
/// that slot. Throws InvalidArgument when `configs` is empty.
AblationResult run_ablation(std::span<const QuestionRecord> corpus,
                            std::span<const AblationConfig> configs,
                            const AblationOptions& options = {});

struct SweepConfig {
  std::vector<std::size_t> ratios{1, 3, 5, 7, 9};
  std::vector<std::size_t> hints{0, 1, 2};
  double leak_rate = 1.0;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  /// Defaults to the legal-case fixture.
  std::optional<QuestionRecord> question;
  ReplacementPool pool = ReplacementPool::builtin();

  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct SweepCell {
  std::size_t r = 0;
  std::size_t hints = 0;
  Estimate exact;
  Estimate jaccard;
  Estimate cosine;
};

struct SweepResult {
  SweepConfig config;
  /// Row-major over (hints, r).
  std::vector<SweepCell> cells;
  /// Undefended model (genuine statement only, not denied), per hint level.
  std::vector<SweepCell> baseline;

  const SweepCell& at(std::size_t r, std::size_t hints) const;
};

/// Hinted text-completion attacks against a simulator holding one denied
/// genuine statement and r combined synthetics. Trial t draws from the same
/// stream in every cell.
SweepResult run_ratio_sweep(const SweepConfig& config);

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

using Cell = std::variant<std::string, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  bool operator==(const Table&) const = default;
};

Table to_table(const ForgetfulnessReport& report);
/// One row per attack type.
Table type_table(const ForgetfulnessReport& report);
Table to_table(const AblationResult& result);
Table to_table(const SweepResult& result);

/// "markdown" or "csv". Numbers use the shortest round-tripping form; CSV
/// strings are always quoted.
std::string render_table(const Table& table, std::string_view format);
std::string render_report(const ForgetfulnessReport& report, std::string_view format);
/// Inverse of render_table(table, "csv").
Table parse_csv(std::string_view csv);

}  // namespace p2f
