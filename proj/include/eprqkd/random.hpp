#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace eprqkd {

/// Well-known substream identifiers. Each party draws from its own stream so
/// that adding draws for one actor never perturbs another.
enum class Stream : std::uint64_t {
  alice = 1,
  bob = 2,
  eve = 3,
  clare = 4,
};

/// Seedable, reproducible randomness source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distributions are implemented here rather than taken from
/// <random> because the standard distributions are implementation-defined,
/// and reports must be byte-stable across toolchains.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream_id);
  RandomSource(std::uint64_t seed, Stream stream)
      : RandomSource(seed, static_cast<std::uint64_t>(stream)) {}

  /// Independent child stream. Deterministic in (seed, stream_id, child).
  [[nodiscard]] RandomSource substream(std::uint64_t child) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n). Unbiased (rejection sampling). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  /// True with probability p.
  bool bernoulli(double p) { return uniform() < p; }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to decorrelate (seed, stream) pairs.
std::uint64_t mix64(std::uint64_t x);

}  // namespace eprqkd
