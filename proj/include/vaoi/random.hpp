#pragma once

#include <cstdint>
#include <random>

namespace vaoi {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of substream `stream_id` under `master_seed`:
/// splitmix64(master_seed ^ splitmix64(stream_id)).
constexpr std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t stream_id) {
  return splitmix64(master_seed ^ splitmix64(stream_id));
}

/// mt19937_64 wrapper with portable uniform and Bernoulli draws.
///
/// std::uniform_real_distribution is implementation-defined, so draws use the
/// top 53 bits of one engine output: u = (x >> 11) * 2^-53, success iff u < p.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master_seed, std::uint64_t stream_id)
      : engine_(substream_seed(master_seed, stream_id)) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  /// Uniform integer in [0, n) by rejection on the raw 64-bit output.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = Engine::max() - (Engine::max() % n + 1) % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x > limit);
    return x % n;
  }

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
};

}  // namespace vaoi
