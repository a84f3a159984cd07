#pragma once

#include <array>
#include <cstdint>

namespace llnlab {

// Counter-based uniform generator built on Threefry-2x64 with 20 rounds
// (Salmon, Moraes, Dror, Shaw; passes BigCrush).  Every draw is a pure
// function of (seed, trial, channel, index), so simulations can be sharded
// across threads in any order and still reproduce bit-identical paths.

namespace detail {

inline std::uint64_t rotl64(std::uint64_t x, unsigned r) {
    return (x << r) | (x >> (64u - r));
}

} // namespace detail

/// One Threefry-2x64-20 block: encrypt `ctr` under `key`.
inline std::array<std::uint64_t, 2> threefry2x64(std::array<std::uint64_t, 2> ctr,
                                                 std::array<std::uint64_t, 2> key) {
    // Rotation schedule and key-injection cadence follow the reference
    // implementation; the parity constant is the Skein KS value.
    constexpr unsigned rot[8] = {16, 42, 12, 31, 16, 32, 24, 21};
    const std::uint64_t ks[3] = {key[0], key[1],
                                 0x1BD11BDAA9FC1A22ull ^ key[0] ^ key[1]};
    std::uint64_t x0 = ctr[0] + ks[0];
    std::uint64_t x1 = ctr[1] + ks[1];
    for (unsigned r = 0; r < 20; ++r) {
        x0 += x1;
        x1 = detail::rotl64(x1, rot[r % 8]);
        x1 ^= x0;
        if ((r + 1) % 4 == 0) {
            unsigned j = (r + 1) / 4; // 1..5
            x0 += ks[j % 3];
            x1 += ks[(j + 1) % 3] + j;
        }
    }
    return {x0, x1};
}

/// Uniform double in [0, 1) from logical coordinates.  Key carries the
/// replication identity (seed, trial); the counter carries the within-trial
/// position (channel, index).  Channel 0 is reserved for path draws and
/// channel 1 for policy-level randomization, so adding a channel never
/// perturbs existing streams.
inline double u01(std::uint64_t seed, std::uint64_t trial,
                  std::uint64_t channel, std::uint64_t index) {
    auto block = threefry2x64({channel, index}, {seed, trial});
    return static_cast<double>(block[0] >> 11) * 0x1.0p-53;
}

/// Stateful view over one (seed, trial, channel) lane.  Copyable; copies
/// continue from the same position independently.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::uint64_t channel = 0;
    std::uint64_t index = 0;

    double next() { return u01(seed, trial, channel, index++); }
};

} // namespace llnlab
