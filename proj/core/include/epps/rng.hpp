#pragma once

// Counter-based Philox4x32-10 generator. A stream is fully determined by (seed, stream ids),
// so per-asset and per-day draws are independent of evaluation order.

#include <array>
#include <cstdint>

namespace epps {

class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    /// Raw Philox4x32-10 bijection.
    static Block encrypt(Block counter, Key key);

    /// Stream keyed by `seed`, with two 32-bit stream identifiers placed in the upper counter
    /// words (e.g. purpose/asset and day). The lower 64 bits count blocks.
    Philox(std::uint64_t seed, std::uint32_t stream_a = 0, std::uint32_t stream_b = 0);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller (pairs cached).
    double normal();
    /// Exponential with the given rate.
    double exponential(double rate);

private:
    void refill();

    Key key_{};
    std::uint64_t block_ = 0;
    std::uint32_t stream_a_ = 0;
    std::uint32_t stream_b_ = 0;
    Block buffer_{};
    unsigned used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stream purposes used across the library, so that the same seed never reuses a stream.
enum class StreamPurpose : std::uint32_t {
    path_noise = 1,
    ticks = 2,
    fit_noise = 3,
};

inline std::uint32_t stream_id(StreamPurpose purpose, std::uint32_t index) {
    return (static_cast<std::uint32_t>(purpose) << 24) ^ (index & 0x00FFFFFFu);
}

}  // namespace epps
