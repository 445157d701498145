#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace eprsim::rng {

/// Philox4x32-10 counter-based generator (Salmon et al. keystream cipher).
///
/// Every random draw in the simulator is addressed by a coordinate
/// (seed, stream, shot, draw) instead of generator state.  Shot loops can
/// therefore be split across any number of workers, in any order, and
/// still produce bit-identical results: draw i of shot s never depends on
/// who computed shot s-1.
struct PhiloxKey {
    std::uint32_t k0 = 0;
    std::uint32_t k1 = 0;
};

inline PhiloxKey key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// One 10-round Philox4x32 block.  Counter layout used throughout:
/// c = {shot_lo, shot_hi, stream, draw}.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               PhiloxKey key) {
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key.k0,
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key.k1,
               static_cast<std::uint32_t>(p0)};
        key.k0 += w0;
        key.k1 += w1;
    }
    return ctr;
}

inline std::array<std::uint32_t, 4> make_counter(std::uint64_t shot,
                                                 std::uint32_t stream,
                                                 std::uint32_t draw) {
    return {static_cast<std::uint32_t>(shot), static_cast<std::uint32_t>(shot >> 32),
            stream, draw};
}

/// Map two 32-bit words to a double in [0, 1) using the top 53 bits.
inline double to_unit_double(std::uint32_t lo, std::uint32_t hi) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Two independent uniforms from one Philox block.
inline std::pair<double, double> uniform_pair(std::uint64_t seed, std::uint32_t stream,
                                              std::uint64_t shot, std::uint32_t draw) {
    const auto w = philox4x32(make_counter(shot, stream, draw), key_from_seed(seed));
    return {to_unit_double(w[0], w[1]), to_unit_double(w[2], w[3])};
}

inline double uniform(std::uint64_t seed, std::uint32_t stream, std::uint64_t shot,
                      std::uint32_t draw) {
    return uniform_pair(seed, stream, shot, draw).first;
}

/// Box-Muller pair.  log/cos/sin run in fixed per-element order, so the
/// result is a pure function of the coordinate (same build, same bits).
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint32_t stream,
                                      std::uint64_t shot, std::uint32_t draw);

/// Stateful cursor over one (seed, stream) substream: hands out uniforms
/// and normals one at a time.  Interactive-measurement code uses this;
/// bulk shot loops address coordinates directly.
class UniformSource {
  public:
    UniformSource(std::uint64_t seed, std::uint32_t stream)
        : seed_(seed), stream_(stream) {}

    double next();
    double next_normal();

  private:
    std::uint64_t seed_;
    std::uint32_t stream_;
    std::uint64_t shot_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace eprsim::rng
