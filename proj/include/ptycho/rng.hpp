#pragma once

#include <cstdint>
#include <vector>

namespace ptycho {

/// Small counter-based PRNG (splitmix64 core) so every draw is a pure
/// function of (seed, stream...). Keeps datasets and batch schedules
/// bit-identical across runs and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}

  static Rng keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return Rng(mix(mix(seed) ^ mix(a * 0x9E3779B97F4A7C15ULL + b)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box--Muller.
  double gaussian();

  /// Poisson draw; inversion for small means, rounded normal beyond.
  long poisson(double mean);

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  explicit Rng(std::uint64_t raw, int) : state_(raw) {}
  static std::uint64_t mix(std::uint64_t x);

  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Fisher-Yates permutation of {0..n-1}.
std::vector<int> random_permutation(int n, Rng& rng);

}  // namespace ptycho
