#pragma once

#include <array>
#include <cstdint>

namespace ehaloha {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr Counter round(Counter const& ctr, Key const& key) noexcept
{
    std::uint64_t const p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    std::uint64_t const p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
    auto const lo0 = static_cast<std::uint32_t>(p0);
    auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
    auto const lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

constexpr Counter generate(Counter ctr, Key key) noexcept
{
    for (int r = 0; r < 10; ++r)
    {
        if (r > 0)
        {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        ctr = round(ctr, key);
    }
    return ctr;
}

}  // namespace philox

//! 64-bit finalizer from splitmix64; used for seed and stream derivation.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace ehaloha
