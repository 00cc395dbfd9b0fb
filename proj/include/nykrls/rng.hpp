#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "nykrls/errors.hpp"

namespace nykrls {

// SplitMix64 finalizer. Used to derive independent substream seeds; the
// mt19937_64 engine itself provides the draw sequence.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the (stream, index) substream of a base seed. Every randomized
// stage (splits, landmark draws, retrain draws, score sketches) gets its own
// stream tag so stages can be reordered or parallelized without interference.
inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

inline constexpr std::uint64_t kSplitStream = 0x5350u;     // hold-out shuffles
inline constexpr std::uint64_t kLandmarkStream = 0x4c4du;  // landmark draws
inline constexpr std::uint64_t kRetrainStream = 0x5254u;   // winner retrain draws
inline constexpr std::uint64_t kScoreStream = 0x5343u;     // score sketch pilots
inline constexpr std::uint64_t kNoiseStream = 0x4e4fu;     // synthetic data noise

// Deterministic generator. mt19937_64 has a standard-defined output sequence,
// and the integer/uniform mappings below avoid std::uniform_int_distribution
// and friends, whose draw sequences differ across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform integer in [0, bound) by rejection; unbiased for any bound.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw InputError("Rng::below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = gen_();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; one spare draw is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]; keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// In-place Fisher-Yates shuffle driven by Rng::below.
template <typename Container>
void shuffle(Container& items, Rng& rng) {
  const std::size_t n = items.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(items[i], items[j]);
  }
}

}  // namespace nykrls
