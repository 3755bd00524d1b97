#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qbnc {

// Seedable 64-bit random source used everywhere randomness is needed.
//
// The engine is std::mt19937_64, whose output sequence is pinned by the
// C++ standard, and all draws below are built from raw 64-bit words rather
// than std::*_distribution (whose results are implementation-defined).
// Identical seeds therefore reproduce identical streams on any platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) via 128-bit multiply-shift.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  // Standard normal via Box-Muller; consumes two uniforms per call
  // (no cached second value, so the stream stays position-independent).
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; mixes a base seed with stream indices so derived
// streams (per kernel entry, per classified row) are independent of the
// order in which they are consumed.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a) {
  return mix_seed(base ^ mix_seed(a));
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(base, a) ^ mix_seed(~b));
}

}  // namespace qbnc
