#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace p2f {

/// splitmix64 finalizer; derives independent stream seeds from one run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

/// Seeded generator with platform-independent draws.
///
/// std::mt19937_64 output is fully specified by the standard; the standard
/// distributions are not, so draws are derived from raw engine output here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace p2f
