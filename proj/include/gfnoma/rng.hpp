#pragma once

#include <cstdint>
#include <random>

namespace gfnoma {

/// One step of the splitmix64 generator; also a good 64-bit mixing function.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Collapse a (seed, stream) pair into one well-mixed 64-bit value.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64_next(s);
  s ^= 0xD1B54A32D192ED03ull * (stream + 1);
  h ^= splitmix64_next(s);
  return h;
}

/// Independent, reproducible substream `stream` of the master seed: the pair
/// is hashed through splitmix64 and the result seeds a Mersenne Twister. Any
/// unit of work (a frame, a state row, a sweep cell) gets its own stream id,
/// so results do not depend on the order in which units are executed.
inline std::mt19937_64 substream_engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(mix_seed(seed, stream));
}

/// Uniform draw on [0, 1) with 53 random bits. Hand-rolled (instead of
/// std::uniform_real_distribution) so every draw consumes exactly one engine
/// step on every platform.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Unit-mean exponential draw; consumes exactly one engine step.
inline double exp_unit(std::mt19937_64& eng) { return -std::log1p(-uniform01(eng)); }

}  // namespace gfnoma
