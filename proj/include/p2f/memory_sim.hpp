#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "p2f/core.hpp"
#include "p2f/random.hpp"

namespace p2f {

enum class Origin { Genuine, Synthetic };

std::string_view to_string(Origin origin);

struct MemoryStatement {
  std::string text;
  TokenSequence content;
  Origin origin = Origin::Genuine;
  bool denied = false;
  bool affirmed = false;
  /// Value of each sub-answer slot as stated here, indexed like the SubQA list.
  /// Used to answer slot-targeted attacks. May be empty.
  std::vector<std::string> slot_values;
  /// Multiplies both the match score and the draw weight.
  double match_weight = 1.0;
  /// Normalized token set of `text`, sorted.
  std::vector<std::string> terms;

  /// Builds a statement and checks that it is not both denied and affirmed.
  static MemoryStatement make(std::string text, Origin origin, bool denied, bool affirmed,
                              std::vector<std::string> slot_values = {},
                              double match_weight = 1.0);

  bool operator==(const MemoryStatement&) const = default;
};

struct SimulatorParams {
  /// Probability that denied statements stay in the candidate pool.
  double leak_rate = 0.0;
  /// Minimum weighted Jaccard between query and statement.
  double match_threshold = 0.0;
  std::uint64_t rng_seed = 0;
  /// Keep only the best-matching statements: k = max(1, matching - hints).
  bool hinted = false;
  std::size_t hints = 0;

  void validate() const;
};

struct RatioConfig {
  std::size_t r = 0;
};

/// Retrieval model with leaky denial. A query draws two uniforms per call:
/// u1 decides whether denied statements leak (u1 < leak_rate), u2 picks one
/// pool member by weight. Both are always drawn so that runs sharing a seed
/// stay aligned across configurations.
class MemorySimulator {
 public:
  static constexpr std::string_view kRefusal = "no relevant memory";

  /// Appends statements not already held. Re-ingesting a list is a no-op.
  void ingest(std::span<const MemoryStatement> statements);

  std::span<const MemoryStatement> statements() const { return statements_; }
  std::size_t size() const { return statements_.size(); }
  bool empty() const { return statements_.empty(); }

  /// The recalled statement, or nullptr when the pool is empty. Statements
  /// that carry slot values must state every slot in `slots` to match.
  const MemoryStatement* recall(std::string_view query, const SimulatorParams& params, Rng& rng,
                                std::span<const std::size_t> slots = {}) const;

  /// Recalled text, or the value of `slot` in the recalled statement when it
  /// carries one; kRefusal when nothing is recalled.
  std::string answer_attack(std::string_view query, const SimulatorParams& params, Rng& rng,
                            std::optional<std::size_t> slot = std::nullopt) const;
  /// Same, seeded from params.rng_seed.
  std::string answer_attack(std::string_view query, const SimulatorParams& params,
                            std::optional<std::size_t> slot = std::nullopt) const;

 private:
  std::vector<MemoryStatement> statements_;
};

/// lambda / (r + 1): chance the genuine statement is recalled when every
/// statement matches and only the genuine one is denied.
double expected_genuine_recall(std::size_t r, double leak_rate);

/// 1 - lambda / max(1, r + 1 - hints): exact-match forgetfulness in hinted
/// mode when the genuine statement always ranks first. hints = 0 gives the
/// unhinted value.
double expected_exact_forgetfulness(std::size_t r, double leak_rate, std::size_t hints = 0);

}  // namespace p2f
