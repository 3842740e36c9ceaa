#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "p2f/backend.hpp"
#include "p2f/core.hpp"
#include "p2f/metrics.hpp"

namespace p2f {

struct SyntheticCandidate {
  std::string text;
  double r_d = 0.0;
  double s_c = 0.0;
  double combined = 0.0;
};

class PoolExhausted : public Error {
 public:
  using Error::Error;
};

/// Fabrication came back short even after the continuation prompt.
class IncompleteFabrication : public Error {
 public:
  IncompleteFabrication(std::string message, std::vector<std::size_t> deficient);
  /// Zero-based indices of sub-questions with fewer than m candidates.
  const std::vector<std::size_t>& deficient() const { return deficient_; }

 private:
  std::vector<std::size_t> deficient_;
};

/// Replacement values per element label (ORG, PERSON, PLACE, TECH, DATE, NUM,
/// MISC).
class ReplacementPool {
 public:
  ReplacementPool() = default;
  explicit ReplacementPool(std::map<std::string, std::vector<std::string>> entries);

  /// The pools shipped under assets/pools.
  static ReplacementPool builtin();
  /// Every `<LABEL>.txt` in `dir`, one value per line; blank lines and lines
  /// starting with '#' are skipped.
  static ReplacementPool load_dir(const std::filesystem::path& dir);

  /// Copy without values that normalize equal to any of `gold`.
  ReplacementPool excluding(std::span<const std::string> gold) const;

  bool has(std::string_view label) const;
  /// Throws InvalidArgument for unknown labels.
  const std::vector<std::string>& values(std::string_view label) const;
  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

/// A replaceable byte range of an answer and the pool it draws from.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;
};

/// Runs of PROPN tokens (ORG, or the hint when it is PERSON or PLACE) and NUM
/// tokens (NUM, or DATE when hinted). With none, the whole answer is one
/// segment labelled with the hint, or MISC.
std::vector<Segment> replaceable_segments(std::string_view answer, std::string_view label_hint);

/// m candidates that keep the answer's scaffolding and swap each segment for
/// a pool value. Deterministic in `seed`; a value never repeats across
/// candidates of one segment and never equals the genuine text.
std::vector<std::string> local_fabricate(const SubQA& sub_qa, std::size_t m,
                                         const ReplacementPool& pool, std::uint64_t seed);

enum class FabricationVersion { V1, V2 };

std::string_view to_string(FabricationVersion version);
FabricationVersion parse_fabrication_version(std::string_view name);

/// Catalog prompt for one sub-question. `index` is zero-based and printed
/// one-based.
std::string build_fabrication_prompt(FabricationVersion version, std::size_t m, std::size_t index,
                                     const SubQA& sub_qa);

/// Candidate lines per one-based sub-question number. Lines under "Initial"
/// headers are skipped; lines under "Additional"/"Alternative" headers are
/// collected. Text with no headers at all goes to `default_number`.
std::map<std::size_t, std::vector<std::string>> parse_fabrication_reply(
    std::string_view reply, std::size_t default_number);

class FabricationEngine {
 public:
  virtual ~FabricationEngine() = default;
  /// m candidates per sub-question, in order.
  virtual std::vector<std::vector<std::string>> generate(std::span<const SubQA> sub_qas,
                                                         std::size_t m) = 0;
};

class LocalFabricationEngine : public FabricationEngine {
 public:
  LocalFabricationEngine(ReplacementPool pool, std::uint64_t seed);
  std::vector<std::vector<std::string>> generate(std::span<const SubQA> sub_qas,
                                                 std::size_t m) override;

 private:
  ReplacementPool pool_;
  std::uint64_t seed_;
};

/// One prompt per sub-question in `session`, plus at most one continuation
/// prompt for each that comes back short.
class LlmFabricationEngine : public FabricationEngine {
 public:
  LlmFabricationEngine(Session& session, FabricationVersion version);
  std::vector<std::vector<std::string>> generate(std::span<const SubQA> sub_qas,
                                                 std::size_t m) override;

 private:
  Session& session_;
  FabricationVersion version_;
};

struct FabricatedAnswer {
  std::vector<SyntheticCandidate> candidates;
  std::size_t chosen = 0;

  const std::string& text() const { return candidates.at(chosen).text; }
};

/// Scores every candidate and keeps the argmax of r_d + S_c. Candidates with
/// r_d = 0 are passed over whenever another has r_d > 0.
FabricatedAnswer select_candidate(const SubQA& sub_qa, std::span<const std::string> candidates,
                                  const ConsistencyParams& params = {});

std::vector<FabricatedAnswer> fabricate_and_select(std::span<const SubQA> sub_qas, std::size_t m,
                                                   FabricationEngine& engine,
                                                   const ConsistencyParams& params = {});

}  // namespace p2f
