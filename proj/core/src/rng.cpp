#include "noc/rng.hpp"

namespace noc {

int Rng::uniform_int(int n) {
  // Multiply-shift on the top 32 bits; bias is at most n / 2^32.
  const std::uint64_t top = engine_() >> 32;
  return static_cast<int>((top * static_cast<std::uint64_t>(n)) >> 32);
}

int Rng::categorical(std::span<const double> probs) {
  const double x = uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = static_cast<int>(i);
    if (x < acc) return last_positive;
  }
  return last_positive;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace noc
