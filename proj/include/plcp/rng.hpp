#pragma once

#include <cstdint>
#include <vector>

namespace plcp {

/// Portable counter-based generator (SplitMix64 output function).
///
/// Draw k (k = 1, 2, ...) is mix(seed + k * 0x9E3779B97F4A7C15), so the stream
/// depends only on the seed and the draw count, never on the platform's
/// standard library. Doubles use the top 53 bits; normals use Box-Muller with
/// a cached second deviate. Independent sub-streams come from substream(),
/// whose seed is mix(seed ^ mix(index + 1)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  double normal();
  bool coin() { return (next_u64() >> 63) != 0; }

  Rng substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// Seeded Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace plcp
