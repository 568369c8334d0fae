#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace lmlab {

/// Seedable deterministic random source (SplitMix64).
///
/// The stream is a pure function of the seed, so two generators built from the
/// same seed produce identical draws on every platform with IEEE-754 doubles.
/// Independent sub-streams for trials are derived with split().
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64";

  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();

  /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Child generator for stream `stream`; the parent's position is irrelevant.
  Rng split(std::uint64_t stream) const;

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace lmlab
