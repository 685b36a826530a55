#include "eprqkd/random.hpp"

#include <limits>

#include "eprqkd/errors.hpp"

namespace eprqkd {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(mix64(seed ^ mix64(stream_id))) {}

RandomSource RandomSource::substream(std::uint64_t child) const {
  return RandomSource(seed_, mix64(stream_id_ * 0x100000001b3ULL ^ mix64(child)));
}

double RandomSource::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RandomSource::uniform_index(std::size_t n) {
  if (n == 0) throw InternalError("uniform_index: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Largest multiple of bound that fits; values at or above it are rejected.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % bound);
}

}  // namespace eprqkd
