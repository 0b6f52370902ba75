#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace dyson {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 128-bit counter is split into a 64-bit stream id (high half) and a
/// 64-bit block index (low half), so every (seed, stream) pair addresses an
/// independent, reproducible sequence without any shared state.
class Philox4x32 {
public:
    using result_type = std::uint64_t;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Jump to an absolute block index within the stream.
    void seek(std::uint64_t block) noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    std::size_t used_ = 4;  // words consumed from block_
};

/// A seeded random stream: Philox engine plus the distributions the
/// simulators need. One stream per trajectory; never shared across threads.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : engine_(master_seed, stream_index) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }
    bool coin() { return (engine_() >> 63) != 0; }

    Philox4x32& engine() noexcept { return engine_; }

private:
    Philox4x32 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace dyson
