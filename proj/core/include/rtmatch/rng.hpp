#pragma once

// Explicit random streams. Nothing in the library touches a global RNG.

#include <cstdint>
#include <random>

namespace rtmatch {

/// SplitMix64 finaliser; the building block of seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds `value` into `seed`. Order-sensitive: derive(derive(s, a), b) differs
/// from derive(derive(s, b), a).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

/// A 64-bit Mersenne Twister with platform-independent uniform variates.
/// (std::uniform_real_distribution is implementation-defined, so it is not used.)
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  std::mt19937_64 engine_;
};

/// The two streams of one replication. `arrivals` feeds everything decided at
/// arrival (class, shortage thinning, awaits flag, initial patience and grant
/// draws) and never depends on queue contents, so it is identical across
/// policies and shortage levels. `dynamics` feeds in-queue events.
struct Streams {
  RandomStream arrivals;
  RandomStream dynamics;

  static Streams for_replication(std::uint64_t master_seed, std::uint64_t replication) {
    const std::uint64_t base = derive_seed(master_seed, replication);
    return Streams{RandomStream(derive_seed(base, 1)), RandomStream(derive_seed(base, 2))};
  }
};

}  // namespace rtmatch
