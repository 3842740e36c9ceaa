#include "p2f/random.hpp"

#include "p2f/core.hpp"

#include <utility>

namespace p2f {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  // FNV-1a of the stream name, then the same mixer.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return derive_seed(seed, h);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InvalidArgument("Rng::below: n must be positive");
  auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  return perm;
}

}  // namespace p2f
