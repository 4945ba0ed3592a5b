#pragma once

#include <cstdint>
#include <string_view>

namespace palmseg {

/// SplitMix64 generator. Hand-pinned so that seeded streams are identical on
/// every platform and standard library, which the reproducibility guarantees
/// (identical splits, augmentations and weight init for a given seed) rely on.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();

  /// Uniform in [0, 1).
  double next_double();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n). n must be positive.
  int64_t next_below(int64_t n);

private:
  uint64_t state_;
};

/// FNV-1a style mixing used to derive independent sub-seeds, e.g. one stream
/// per parameter tensor or per augmented copy of a sample.
uint64_t hash_combine(uint64_t seed, std::string_view text);
uint64_t hash_combine(uint64_t seed, uint64_t value);

}  // namespace palmseg
