#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "p2f/core.hpp"

namespace p2f {

class MetricError : public Error {
 public:
  using Error::Error;
};

/// Weights of the length term (alpha) and the word-class term (beta).
struct ConsistencyParams {
  double alpha = 0.5;
  double beta = 0.5;

  /// Throws InvalidArgument unless alpha, beta >= 0 and alpha + beta <= 1.
  void validate() const;
};

enum class SimilarityKind { Jaccard, Cosine };

std::string_view to_string(SimilarityKind kind);

struct PRF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Fraction of genuine positions whose token differs in the candidate,
/// compared over the shared prefix only. Case-insensitive.
double semantic_distinction_ratio(const TokenSequence& genuine, const TokenSequence& candidate);

/// 1 - (alpha * gamma + beta * eta), gamma the relative length gap and eta the
/// word-class mismatch rate over the shared prefix.
double structure_consistency(const TokenSequence& genuine, const TokenSequence& candidate,
                             const ConsistencyParams& params = {});

struct CandidateScore {
  double r_d = 0.0;
  double s_c = 0.0;
  double combined = 0.0;
};

CandidateScore score_candidate(const TokenSequence& genuine, const TokenSequence& candidate,
                               const ConsistencyParams& params = {});

struct Selection {
  std::size_t index = 0;
  std::vector<CandidateScore> scores;
};

/// Argmax of r_d + S_c; the lowest index wins ties.
Selection select_best_candidate(const TokenSequence& genuine,
                                std::span<const TokenSequence> candidates,
                                const ConsistencyParams& params = {});

double similarity(std::span<const std::string> a, std::span<const std::string> b,
                  SimilarityKind kind);
double similarity(std::string_view a, std::string_view b, SimilarityKind kind);

/// Mean of 1 - similarity over aligned (genuine, attack) pairs.
double forgetfulness(std::span<const std::string> genuine_answers,
                     std::span<const std::string> attack_answers, SimilarityKind kind);

/// |tokens(extracted) ∩ tokens(gold)| / |tokens(gold)| over normalized token sets.
double gold_coverage(std::string_view extracted, std::string_view gold);

/// One-to-one greedy matching, highest coverage first, coverage >= 0.5.
PRF1 prf1(std::span<const std::string> extracted, std::span<const std::string> gold);

}  // namespace p2f
