#pragma once

#include <cstdint>

namespace atlab {

// Counter-based RNG: every variate is a pure function of (master seed, stream
// tag, counters). Chains derive per-site/per-sweep uniforms without any shared
// state, so trajectories are identical for any worker count.
namespace rng {

inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t hash(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) {
  uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ull);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  h = mix64(h ^ d);
  return h;
}

// Uniform in [0,1).
inline double to_unit(uint64_t h) { return (h >> 11) * 0x1.0p-53; }

inline double uniform(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) {
  return to_unit(hash(seed, a, b, c, d));
}

// Stream tags keep distinct random uses out of each other's counter space.
enum Stream : uint64_t {
  kSpinUpdate = 1,
  kEdgeSample = 2,
  kClusterColor = 3,
  kParamDraw = 4,
  kBootstrap = 5,
  kContext = 6,
};

// Small stateful convenience wrapper for test/parameter draws.
struct Sequence {
  uint64_t seed;
  uint64_t stream;
  uint64_t counter = 0;
  double next() { return uniform(seed, stream, counter++); }
  double next(double lo, double hi) { return lo + (hi - lo) * next(); }
  uint64_t next_u64() { return hash(seed, stream, counter++); }
};

}  // namespace rng
}  // namespace atlab
