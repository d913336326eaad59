#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace chaoslab::rng {

/// Philox4x32-10 counter-based generator. Every draw is addressed by a
/// (counter, key) pair, so parallel consumers produce identical streams for
/// any thread count or evaluation order.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                               std::uint32_t k0, std::uint32_t k1) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += W0;
    k1 += W1;
  }
  return c;
}

/// Draw domains keep independent uses of the counter space disjoint.
enum class Domain : std::uint32_t {
  kInitial = 1,
  kBrownian = 2,
  kBootstrap = 3,
};

inline std::uint32_t pack_domain(Domain d, std::uint32_t draw) {
  return (static_cast<std::uint32_t>(d) << 28) | (draw & 0x0FFFFFFFu);
}

/// One uniform in (0,1] addressed by (replica, index, step, domain/draw).
inline double uniform01(std::uint64_t seed, std::uint32_t replica, std::uint32_t index,
                        std::uint32_t step, Domain domain, std::uint32_t draw = 0) {
  const auto out = philox4x32({replica, index, step, pack_domain(domain, draw)},
                              static_cast<std::uint32_t>(seed),
                              static_cast<std::uint32_t>(seed >> 32));
  const std::uint64_t u =
      (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  return (static_cast<double>(u >> 11) + 1.0) * 0x1.0p-53;
}

/// One standard normal (Box-Muller, cosine branch) per address.
inline double normal(std::uint64_t seed, std::uint32_t replica, std::uint32_t index,
                     std::uint32_t step, Domain domain, std::uint32_t draw = 0) {
  const auto out = philox4x32({replica, index, step, pack_domain(domain, draw)},
                              static_cast<std::uint32_t>(seed),
                              static_cast<std::uint32_t>(seed >> 32));
  const std::uint64_t a =
      (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  const std::uint64_t b =
      (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53; // (0,1]
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;          // [0,1)
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace chaoslab::rng
