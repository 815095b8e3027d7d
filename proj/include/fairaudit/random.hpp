#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

namespace fairaudit {

/// SplitMix64 finalizer; derives independent stream seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator with platform-independent draws.
///
/// The standard distributions are implementation-defined, so bounded
/// integers, uniforms and normals are derived here directly from the
/// mt19937_64 bit stream. Identical seeds give identical sequences on every
/// conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Marsaglia polar method).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace fairaudit
