#pragma once

// Counter-based random streams.
//
// Every random draw in the simulators is addressed by (seed, repeat, domain,
// index), so a sample's value never depends on which worker produced it or
// in what order. The generator is Philox4x32-10.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace pulsehom {

using Philox4x32Block = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

constexpr Philox4x32Block philox4x32_10(Philox4x32Block ctr, Philox4x32Key key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Independent draw families sharing one seed.
enum class StreamDomain : std::uint32_t {
    interference_event = 0,
    click_timing = 1,
    dark_counts = 2,
};

// Map a 32-bit word to (0, 1); never returns 0 or 1.
constexpr double to_open_unit(std::uint32_t u) noexcept {
    return (static_cast<double>(u) + 0.5) * 0x1.0p-32;
}

// Map a 32-bit word to [0, 1).
constexpr double to_half_open_unit(std::uint32_t u) noexcept {
    return static_cast<double>(u) * 0x1.0p-32;
}

// Box-Muller transform of two words into a pair of standard normals.
inline std::pair<double, double> box_muller(std::uint32_t a, std::uint32_t b) noexcept {
    const double radius = std::sqrt(-2.0 * std::log(to_open_unit(a)));
    const double angle = 2.0 * std::numbers::pi * to_half_open_unit(b);
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

// A short random stream owned by one sample: successive blocks are
// obtained by bumping the block counter.
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::uint64_t repeat, StreamDomain domain,
                 std::uint64_t index) noexcept {
        const std::uint64_t k = splitmix64(seed ^ splitmix64(repeat + 0x632BE59BD9B4E019ull));
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        ctr_ = {0u, static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(index),
                static_cast<std::uint32_t>(index >> 32)};
    }

    Philox4x32Block next_block() noexcept {
        const Philox4x32Block out = philox4x32_10(ctr_, key_);
        ++ctr_[0];
        return out;
    }

    std::uint32_t next_u32() noexcept {
        if (used_ == 4) {
            buffer_ = next_block();
            used_ = 0;
        }
        return buffer_[used_++];
    }

    double uniform() noexcept { return to_open_unit(next_u32()); }

    double normal() noexcept {
        const std::uint32_t a = next_u32();
        const std::uint32_t b = next_u32();
        return box_muller(a, b).first;
    }

private:
    Philox4x32Key key_{};
    Philox4x32Block ctr_{};
    Philox4x32Block buffer_{};
    int used_ = 4;
};

}  // namespace pulsehom
