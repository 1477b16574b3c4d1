#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace relab {

/**
 * Deterministic random number generator (xoshiro256++).
 *
 * Hand-rolled instead of <random> because the 256-bit state is serialized into
 * checkpoints and the produced sequences must be identical across platforms and
 * standard-library versions. normal() uses Box-Muller without a cached spare so
 * the entire generator state is exactly the four words returned by state().
 */
class Rng {
public:
  using State = std::array<std::uint64_t, 4>;

  Rng() : Rng(0x9e3779b97f4a7c15ULL) {}

  /// Seeds the four state words by iterating splitmix64 over `seed`.
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) word = splitmix64(x);
  }

  /// Next raw 64-bit value.
  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Uses rejection sampling to avoid modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  State state() const { return s_; }
  void set_state(const State& s) { s_ = s; }

  /// Derives an independent seed from a base seed and a stream path
  /// (purpose tag, actor id). Same inputs always give the same stream.
  static std::uint64_t derive(std::uint64_t base, std::uint64_t purpose,
                              std::uint64_t index = 0) {
    std::uint64_t x = base;
    std::uint64_t h = splitmix64(x);
    x = h ^ (purpose * 0xbf58476d1ce4e5b9ULL);
    h = splitmix64(x);
    x = h ^ (index * 0x94d049bb133111ebULL);
    return splitmix64(x);
  }

private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  State s_{};
};

/// Purpose tags for Rng::derive so every consumer gets a disjoint stream.
namespace stream {
constexpr std::uint64_t kInit = 1;   ///< parameter initialization
constexpr std::uint64_t kEnv = 2;    ///< environment resets
constexpr std::uint64_t kAct = 3;    ///< action exploration
constexpr std::uint64_t kLearn = 4;  ///< batch sampling / noise during learn
constexpr std::uint64_t kEval = 5;   ///< evaluation episodes
}  // namespace stream

}  // namespace relab
