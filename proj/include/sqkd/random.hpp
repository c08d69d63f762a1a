#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sqkd/errors.hpp"

namespace sqkd {

// Deterministic random stream used everywhere randomness is needed.
//
// Only the raw 64-bit output of mt19937_64 is consumed; uniform doubles,
// bounded integers and shuffles are derived here by hand. The standard
// distribution adapters are implementation-defined, so using them would make
// "same seed, same transcript" hold only within one standard library build.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1), 53 significant bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::size_t next_index(std::size_t bound) {
    if (bound == 0) throw DimensionMismatch("next_index: bound must be positive");
    const std::uint64_t b = bound;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % b;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % b);
  }

  // Fair coin.
  bool next_bool() { return (engine_() >> 63) != 0; }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_index(i)]);
    }
  }

  // Independent child stream, e.g. one per parallel sweep worker.
  RandomStream fork(std::uint64_t salt) {
    return RandomStream(engine_() ^ (salt * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
  }

 private:
  std::mt19937_64 engine_;
};

// Sample an index from a discrete distribution. `probs` must be nonnegative
// and sum to ~1; entries of zero weight are never selected.
inline std::size_t sample_discrete(const std::vector<double>& probs, RandomStream& rng) {
  if (probs.empty()) throw InvalidDistribution("sample_discrete: empty distribution");
  const double u = rng.next_double();
  double cum = 0.0;
  std::size_t last_positive = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < -1e-12) throw InvalidDistribution("sample_discrete: negative weight");
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cum += probs[i];
    if (u < cum) return i;
  }
  // Rounding left a sliver between cum and 1: attribute it to the last
  // positive-weight outcome.
  if (last_positive == probs.size())
    throw InvalidDistribution("sample_discrete: all weights are zero");
  return last_positive;
}

}  // namespace sqkd
