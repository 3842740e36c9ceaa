#include "p2f/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace p2f {
namespace {

constexpr double kMatchOverlap = 0.5;
constexpr double kTieTolerance = 1e-12;

void require_genuine(const TokenSequence& genuine) {
  if (genuine.empty()) throw MetricError("undefined ratio: genuine sequence is empty");
}

std::set<std::string> token_set(std::span<const std::string> tokens) {
  return {tokens.begin(), tokens.end()};
}

}  // namespace

void ConsistencyParams::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || alpha + beta > 1.0 + 1e-12) {
    throw InvalidArgument("consistency params need alpha, beta >= 0 and alpha + beta <= 1");
  }
}

std::string_view to_string(SimilarityKind kind) {
  return kind == SimilarityKind::Jaccard ? "jaccard" : "cosine";
}

double semantic_distinction_ratio(const TokenSequence& genuine, const TokenSequence& candidate) {
  require_genuine(genuine);
  const std::size_t k = std::min(genuine.size(), candidate.size());
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (to_lower(genuine.tokens[i]) != to_lower(candidate.tokens[i])) ++mismatches;
  }
  return static_cast<double>(mismatches) / static_cast<double>(genuine.size());
}

double structure_consistency(const TokenSequence& genuine, const TokenSequence& candidate,
                             const ConsistencyParams& params) {
  require_genuine(genuine);
  params.validate();
  const double g = static_cast<double>(genuine.size());
  const double c = static_cast<double>(candidate.size());
  const double gamma = std::abs(g - c) / std::max(g, c);
  const std::size_t k = std::min(genuine.size(), candidate.size());
  std::size_t class_mismatches = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (genuine.classes[i] != candidate.classes[i]) ++class_mismatches;
  }
  const double eta = static_cast<double>(class_mismatches) / g;
  return 1.0 - (params.alpha * gamma + params.beta * eta);
}

CandidateScore score_candidate(const TokenSequence& genuine, const TokenSequence& candidate,
                               const ConsistencyParams& params) {
  CandidateScore s;
  s.r_d = semantic_distinction_ratio(genuine, candidate);
  s.s_c = structure_consistency(genuine, candidate, params);
  s.combined = s.r_d + s.s_c;
  return s;
}

Selection select_best_candidate(const TokenSequence& genuine,
                                std::span<const TokenSequence> candidates,
                                const ConsistencyParams& params) {
  if (candidates.empty()) throw InvalidArgument("select_best_candidate: no candidates");
  Selection sel;
  sel.scores.reserve(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    sel.scores.push_back(score_candidate(genuine, candidates[j], params));
    // Scores that agree to rounding count as a tie.
    if (sel.scores[j].combined > sel.scores[sel.index].combined + kTieTolerance) sel.index = j;
  }
  return sel;
}

double similarity(std::span<const std::string> a, std::span<const std::string> b,
                  SimilarityKind kind) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  if (kind == SimilarityKind::Jaccard) {
    const auto sa = token_set(a);
    const auto sb = token_set(b);
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
  }
  std::map<std::string, double> fa, fb;
  for (const auto& t : a) fa[t] += 1.0;
  for (const auto& t : b) fb[t] += 1.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, v] : fa) {
    na += v * v;
    if (auto it = fb.find(t); it != fb.end()) dot += v * it->second;
  }
  for (const auto& [t, v] : fb) nb += v * v;
  // Counts are integers, so na * nb is exact and identical vectors give 1.
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

double similarity(std::string_view a, std::string_view b, SimilarityKind kind) {
  const auto ta = normalized_tokens(a);
  const auto tb = normalized_tokens(b);
  return similarity(std::span<const std::string>(ta), std::span<const std::string>(tb), kind);
}

double forgetfulness(std::span<const std::string> genuine_answers,
                     std::span<const std::string> attack_answers, SimilarityKind kind) {
  if (genuine_answers.size() != attack_answers.size()) {
    throw InvalidArgument("forgetfulness: " + std::to_string(genuine_answers.size()) +
                          " genuine answers but " + std::to_string(attack_answers.size()) +
                          " attack answers");
  }
  if (genuine_answers.empty()) throw InvalidArgument("forgetfulness: no answer pairs");
  double total = 0.0;
  for (std::size_t i = 0; i < genuine_answers.size(); ++i) {
    total += 1.0 - similarity(genuine_answers[i], attack_answers[i], kind);
  }
  return total / static_cast<double>(genuine_answers.size());
}

double gold_coverage(std::string_view extracted, std::string_view gold) {
  const auto g = normalized_tokens(gold);
  const auto gs = token_set(g);
  if (gs.empty()) return 0.0;
  const auto e = normalized_tokens(extracted);
  const auto es = token_set(e);
  std::size_t hit = 0;
  for (const auto& t : gs) hit += es.count(t);
  return static_cast<double>(hit) / static_cast<double>(gs.size());
}

PRF1 prf1(std::span<const std::string> extracted, std::span<const std::string> gold) {
  // (coverage desc, extracted index, gold index) so the greedy pass is stable.
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < extracted.size(); ++i) {
    for (std::size_t j = 0; j < gold.size(); ++j) {
      const double c = gold_coverage(extracted[i], gold[j]);
      if (c >= kMatchOverlap) pairs.emplace_back(c, i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) < std::get<1>(y);
    return std::get<2>(x) < std::get<2>(y);
  });
  std::vector<bool> used_e(extracted.size()), used_g(gold.size());
  std::size_t matches = 0;
  for (const auto& [c, i, j] : pairs) {
    if (used_e[i] || used_g[j]) continue;
    used_e[i] = used_g[j] = true;
    ++matches;
  }
  PRF1 out;
  if (!extracted.empty()) out.precision = static_cast<double>(matches) / extracted.size();
  if (!gold.empty()) out.recall = static_cast<double>(matches) / gold.size();
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

}  // namespace p2f
