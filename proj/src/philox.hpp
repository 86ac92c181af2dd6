// SPDX-License-Identifier: Apache-2.0
//
// Philox4x32-10 counter-based generator (Salmon et al., SC 2011). Every draw
// is a pure function of (key, counter), so parallel scheduling cannot change
// the stream.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace spcs {

namespace philox {

constexpr uint32_t kM0 = 0xD2511F53u;
constexpr uint32_t kM1 = 0xCD9E8D57u;
constexpr uint32_t kW0 = 0x9E3779B9u;
constexpr uint32_t kW1 = 0xBB67AE85u;

inline void round_once(std::array<uint32_t, 4> &c, uint32_t k0, uint32_t k1) {
  const uint64_t p0 = static_cast<uint64_t>(kM0) * c[0];
  const uint64_t p1 = static_cast<uint64_t>(kM1) * c[2];
  const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
  const uint32_t lo0 = static_cast<uint32_t>(p0);
  const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
  const uint32_t lo1 = static_cast<uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr, uint32_t k0,
                                     uint32_t k1) {
  for (int r = 0; r < 10; ++r) {
    round_once(ctr, k0, k1);
    k0 += kW0;
    k1 += kW1;
  }
  return ctr;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

} // namespace philox

// One decorrelated normal stream per (seed, run); draws are indexed by
// (particle, block, tag). Each block yields a Box-Muller pair.
class NoiseStream {
public:
  NoiseStream(uint64_t seed, uint64_t run) {
    const uint64_t k = philox::splitmix64(seed ^ philox::splitmix64(run));
    k0_ = static_cast<uint32_t>(k);
    k1_ = static_cast<uint32_t>(k >> 32);
  }

  // Two independent N(0,1) draws for the given (particle, block, tag).
  void normal_pair(uint32_t particle, uint64_t blk, uint32_t tag,
                   double out[2]) const {
    const auto w = philox::block(
        {static_cast<uint32_t>(blk), static_cast<uint32_t>(blk >> 32), particle,
         tag},
        k0_, k1_);
    const uint64_t a = (static_cast<uint64_t>(w[0]) << 32) | w[1];
    const uint64_t b = (static_cast<uint64_t>(w[2]) << 32) | w[3];
    // 53-bit mantissas mapped into (0, 1).
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1p-53;
    const double u2 = (static_cast<double>(b >> 11) + 0.5) * 0x1p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    double s, c;
#if defined(__GNUC__)
    __builtin_sincos(t, &s, &c);
#else
    s = std::sin(t);
    c = std::cos(t);
#endif
    out[0] = r * c;
    out[1] = r * s;
  }

private:
  uint32_t k0_ = 0, k1_ = 0;
};

} // namespace spcs
