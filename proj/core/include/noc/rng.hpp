#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace noc {

/// Seeded pseudorandom source. Every draw is derived from the raw 64-bit
/// engine output, so a seed reproduces the same stream on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  int uniform_int(int n);

  /// Index drawn from an unnormalized-tolerant probability vector by inverse
  /// CDF; mass lost to rounding falls on the last positive entry.
  int categorical(std::span<const double> probs);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Seed for run `index` of a batch started from `base`. SplitMix64 finalizer,
/// so neighbouring runs get decorrelated engine states.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace noc
