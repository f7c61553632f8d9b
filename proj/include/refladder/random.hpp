// Seedable, splittable random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Distributions are implemented here rather than taken from
// <random> because the standard library's distributions are allowed to differ
// between implementations, which would break byte-identical traces.
// Independent streams are derived from a master seed with SplitMix64.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace refladder {

inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64-v1";

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `stream` of a run whose master seed is `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Well-known stream ids so every component draws from its own sequence.
enum class Stream : std::uint64_t {
  Sampler = 1,
  Judge = 2,
  Assignment = 3,
  Dataset = 4,
  Selection = 5,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Rng split(Stream stream) const { return Rng(derive_seed(seed_, static_cast<std::uint64_t>(stream))); }
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace refladder
